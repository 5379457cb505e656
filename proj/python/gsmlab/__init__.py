"""Python interface to the GSM air-interface security lab."""

from ._gsmlab import (
    DomainError,
    RainbowTable,
    SpecError,
    a51_keystream,
    a52_keystream,
    attack_types,
    clone_sim,
    hardened_a3a8,
    key_fingerprint,
    load_table,
    mini_comp128,
    parse_scenario,
    predict_next_kc,
    recover_keystream,
    run_scenario,
    tmto_build,
    xor_crypt,
)

__all__ = [
    "DomainError",
    "RainbowTable",
    "SpecError",
    "a51_keystream",
    "a52_keystream",
    "attack_types",
    "clone_sim",
    "hardened_a3a8",
    "key_fingerprint",
    "load_table",
    "mini_comp128",
    "parse_scenario",
    "predict_next_kc",
    "recover_keystream",
    "run_scenario",
    "tmto_build",
    "xor_crypt",
]
