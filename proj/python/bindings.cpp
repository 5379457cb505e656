#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsmlab/attacks.hpp"
#include "gsmlab/entities.hpp"
#include "gsmlab/lab.hpp"

namespace py = pybind11;
using namespace gsmlab;

namespace {

Block128 block(const py::bytes& b) {
  const auto s = std::string(b);
  if (s.size() != 16) throw py::value_error("expected 16 bytes");
  Block128 out{};
  std::copy(s.begin(), s.end(), out.begin());
  return out;
}

py::bytes to_bytes(const Block128& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bits to_bits(const std::vector<int>& v) {
  Bits b;
  b.reserve(v.size());
  for (int x : v) {
    if (x != 0 && x != 1) throw py::value_error("bits must be 0 or 1");
    b.push_back(static_cast<Bit>(x));
  }
  return b;
}

std::vector<int> from_bits(std::span<const Bit> b) { return {b.begin(), b.end()}; }

py::dict report_dict(const attack::AttackReport& r) {
  py::dict d;
  d["attack_id"] = r.attack_id;
  d["variant"] = std::string(sim::variant_name(r.variant));
  d["succeeded"] = r.succeeded;
  d["precondition_failed"] = r.precondition_failed;
  d["outcome"] = r.outcome;
  d["queries_used"] = r.queries_used;
  d["ticks_used"] = r.ticks_used;
  py::dict ev;
  for (const auto& [k, v] : r.evidence) ev[py::str(k)] = v;
  d["evidence"] = ev;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gsmlab, m) {
  m.doc() = "GSM air-interface security lab";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  // ciphers
  m.def("a51_keystream", [](std::uint64_t kc, std::uint32_t frame) {
    return from_bits(cipher::a51_keystream(kc, frame).bits);
  }, py::arg("kc"), py::arg("frame"), "228 keystream bits: 114 downlink then 114 uplink.");
  m.def("a52_keystream", [](std::uint64_t kc, std::uint32_t frame) {
    return from_bits(cipher::a52_keystream(kc, frame).bits);
  }, py::arg("kc"), py::arg("frame"));
  m.def("xor_crypt", [](const std::vector<int>& data, const std::vector<int>& ks) {
    return from_bits(cipher::xor_crypt(to_bits(data), to_bits(ks)));
  }, py::arg("data"), py::arg("keystream"));

  // authentication
  m.def("mini_comp128", [](const py::bytes& ki, const py::bytes& rand) {
    const auto o = auth::mini_comp128(block(ki), block(rand));
    return py::make_tuple(o.sres, o.kc);
  }, py::arg("ki"), py::arg("rand"), "Returns (sres, kc).");
  m.def("hardened_a3a8", [](const py::bytes& ki, const py::bytes& rand) {
    const auto o = auth::hardened_a3a8(block(ki), block(rand));
    return py::make_tuple(o.sres, to_bytes(o.kc));
  }, py::arg("ki"), py::arg("rand"), "Returns (sres, 16-byte kc).");
  m.def("key_fingerprint", [](const py::bytes& ki) { return auth::key_fingerprint(block(ki)); });

  // attacks
  m.def("recover_keystream", [](const std::vector<int>& ct, const std::vector<int>& pt) {
    return from_bits(attack::recover_keystream(to_bits(ct), to_bits(pt)));
  }, py::arg("ciphertext"), py::arg("known_plaintext"));
  m.def("predict_next_kc", &attack::predict_next_kc, py::arg("observed"));
  m.def("clone_sim", [](const py::bytes& ki, std::uint64_t budget, bool hardened, std::uint64_t seed) {
    attack::PhysicalSimOracle oracle(block(ki), hardened ? auth::AuthSuite::Hardened : auth::AuthSuite::MiniComp128);
    Rng rng(seed);
    const auto r = attack::clone_sim(oracle, budget, rng);
    py::dict d;
    d["ki"] = r.ki ? py::object(to_bytes(*r.ki)) : py::none();
    d["queries_used"] = r.queries_used;
    d["failure"] = r.failure;
    return d;
  }, py::arg("ki"), py::arg("budget") = 50000, py::arg("hardened") = false, py::arg("seed") = 0,
     "Chosen-challenge Ki recovery against a simulated card holding `ki`.");

  py::class_<attack::RainbowTable>(m, "RainbowTable")
      .def_property_readonly("coverage", &attack::RainbowTable::coverage)
      .def_property_readonly("rows", [](const attack::RainbowTable& t) { return t.rows.size(); })
      .def_property_readonly("keyspace_bits", [](const attack::RainbowTable& t) { return t.params.keyspace_bits; })
      .def("save", [](const attack::RainbowTable& t, const std::string& path) { attack::save_table(path, t); })
      .def("lookup", [](const attack::RainbowTable& t, const std::vector<int>& prefix, const std::vector<int>& verify) {
        return attack::tmto_lookup(t, to_bits(prefix), to_bits(verify));
      }, py::arg("prefix"), py::arg("verify") = std::vector<int>{});
  m.def("tmto_build", [](unsigned keyspace_bits, std::uint32_t chain_length, std::uint32_t chain_count,
                         std::uint32_t color_count, std::uint64_t seed) {
    attack::RainbowParams p;
    p.keyspace_bits = keyspace_bits;
    p.chain_length = chain_length;
    p.chain_count = chain_count;
    p.color_count = color_count;
    p.seed = seed;
    p.validate();
    py::gil_scoped_release nogil;
    return attack::tmto_build(p);
  }, py::arg("keyspace_bits") = 20, py::arg("chain_length") = 256, py::arg("chain_count") = 8192,
     py::arg("color_count") = 256, py::arg("seed") = 1);
  m.def("load_table", [](const std::string& path) {
    auto t = attack::load_table(path);
    attack::recompute_coverage(t);
    return t;
  });

  // scenarios
  m.def("parse_scenario", [](const std::string& text) { return lab::render_scenario(lab::parse_scenario(text)); },
        py::arg("text"), "Validates a scenario and returns it with every default filled in.");
  m.def("run_scenario", [](const std::string& text, std::optional<std::uint64_t> seed) {
    auto s = lab::parse_scenario(text);
    if (seed) s.seed = *seed;
    lab::RunReport r;
    {
      py::gil_scoped_release nogil;
      r = lab::run_scenario(s);
    }
    py::dict d;
    d["scenario"] = r.scenario;
    d["variant"] = std::string(sim::variant_name(r.variant));
    d["seed"] = r.seed;
    py::list attaches;
    for (const auto& a : r.attaches)
      attaches.append(py::make_tuple(a.ms, std::string(sim::attach_status_name(a.outcome.status))));
    d["attaches"] = attaches;
    py::dict attacks;
    for (const auto& e : r.attacks) attacks[py::str(e.label)] = report_dict(e.report);
    d["attacks"] = attacks;
    d["report"] = lab::render_report(r, lab::Format::Text);
    d["matrix"] = lab::render_report(r, lab::Format::Matrix);
    d["trace"] = lab::render_trace(r);
    return d;
  }, py::arg("text"), py::arg("seed") = py::none());
  m.def("attack_types", &lab::attack_types);
}
