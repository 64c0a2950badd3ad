"""Smoke test for the ldcert_py extension.

Build and install it first, e.g. `maturin develop -m crates/ldcert-py/Cargo.toml`,
or `cargo build --release -p ldcert-py --features extension-module` and put
target/release/libldcert_py.so on PYTHONPATH as ldcert_py.so.
"""

import json
import sys

import ldcert_py


def main():
    assert ldcert_py.classical_value("ghz") == "3/4"
    assert ldcert_py.classical_value("magic-square") == "8/9"

    pattern = json.loads(ldcert_py.sample_pattern(32, 2, seed="5"))
    assert pattern["N"] == 32 and len(pattern["pairs"]) == 2

    t = ldcert_py.run_honest(32, 2, seed="5")
    tab = json.loads(ldcert_py.run_honest(32, 2, seed="5", engine="tableau"))
    assert json.loads(t)["output_grid"] == tab["output_grid"]
    verdict = json.loads(ldcert_py.verify(t, 32, 2))
    assert verdict["accept"], verdict

    bad = json.loads(t)
    bad["output_grid"] = [0] * len(bad["output_grid"])
    assert not json.loads(ldcert_py.verify(json.dumps(bad), 32, 2))["accept"]

    rep = json.loads(ldcert_py.entropy_report(1024, 8))
    print("N=1024 r=8: consumed", rep["consumed_bits"], "certified", rep["certified_bits"])

    out = ldcert_py.extract([True, False, True, True], [True, False, False, True, True], 2, 4.0)
    assert len(out) == 2

    proto = json.loads(ldcert_py.full_protocol(32, 2, seed="9", c2=0.0))
    assert proto["verdict"]["accept"]
    print("full protocol extracted", proto["extracted_bits"], "bits")

    try:
        ldcert_py.run_honest(32, 2, seed="not a seed")
    except ValueError:
        pass
    else:
        sys.exit("bad seed accepted")
    print("ok")


if __name__ == "__main__":
    main()
