import json
import math

import numpy as np
import pytest

import eacsi


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_mutual_info_of_bell_pair():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / math.sqrt(2)
    assert eacsi.mutual_info(np.outer(v, v.conj()), 2, 2) == pytest.approx(2.0, abs=1e-12)


def test_mutual_info_rejects_non_density_matrix():
    with pytest.raises(ValueError):
        eacsi.mutual_info(np.eye(4, dtype=complex), 2, 2)


def test_weyl_operators_twirl_to_maximally_mixed():
    rng = np.random.default_rng(1)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    avg = sum(
        eacsi.heisenberg_weyl(3, a, b) @ rho @ eacsi.heisenberg_weyl(3, a, b).conj().T
        for a in range(3)
        for b in range(3)
    ) / 9
    assert np.max(np.abs(avg - np.eye(3) / 3)) < 1e-12


def test_ricochet_residual_is_zero_for_a_unitary():
    q, _ = np.linalg.qr(np.array([[1, 2j], [3, 4]], dtype=complex))
    assert eacsi.ricochet_residual(q) < 1e-12


def test_capacity_dephasing(data_dir):
    path = data_dir / "channels" / "dephasing.json"
    none = eacsi.capacity(path, "none", restarts=4, seed=1)
    causal = eacsi.capacity(str(path), "causal", restarts=4, seed=1)
    assert none["value_bits"] == pytest.approx(1.0, abs=0.02)
    assert causal["value_bits"] >= 1.95


def test_capacity_accepts_dict(data_dir):
    spec = json.loads((data_dir / "channels" / "identity.json").read_text())
    assert eacsi.capacity(spec, restarts=2)["value_bits"] == pytest.approx(2.0, abs=1e-3)


def test_simulate_superdense_and_depolarizing(data_dir):
    ident = eacsi.simulate(data_dir / "channels" / "identity.json", messages=4)
    assert ident["max_error"] == 0.0
    dep = eacsi.simulate(data_dir / "channels" / "depolarizing.json", messages=4)
    assert dep["avg_error"] == pytest.approx(0.75, abs=1e-9)


def test_simulate_is_reproducible(data_dir):
    kw = dict(scheme="noncausal", n=2, delta=0.4, seed=9)
    path = data_dir / "channels" / "dephasing.json"
    assert eacsi.simulate(path, **kw) == eacsi.simulate(path, **kw)


def test_simulate_cap_is_a_value_error(data_dir):
    with pytest.raises(ValueError, match="exceeds the cap"):
        eacsi.simulate(data_dir / "channels" / "dephasing.json", n=9)


def test_baseline_bsc(data_dir):
    r = eacsi.baseline(data_dir / "classical" / "bsc.json")
    assert r["shannon_strategy"] == pytest.approx(1 - h2(0.1), abs=1e-4)
    assert r["gelfand_pinsker"] == pytest.approx(1 - h2(0.1), abs=1e-4)


@pytest.mark.parametrize("suite", ["algebra", "packing", "covering"])
def test_verify_suites(suite):
    checks = eacsi.verify(suite, trials=2000)
    assert checks and all(c["passed"] for c in checks)
    assert not all(c["passed"] for c in eacsi.verify(suite, trials=2000, inject_fault=True))


def test_canonical_spec_round_trip(data_dir):
    text = (data_dir / "channels" / "stuck_at.json").read_text()
    once = eacsi.canonical_spec(text)
    assert eacsi.canonical_spec(once) == once
