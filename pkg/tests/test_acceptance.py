"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed as the tests run and again in the terminal summary.
"""
import json
import time

import numpy as np

from conftest import SIGNATURES
from dirac_lab import docio
from dirac_lab.cli import main, verify_residuals
from dirac_lab.direct import DEFAULT_Z_GRID, fundamental_solution, random_parameter, weyl_disk_membership, weyl_mobius
from dirac_lab.inverse import borg_marchenko_compare, node_pi, recover_potential, solve_identity, structured_S
from dirac_lab.jalgebra import Signature
from dirac_lab.potential import SchurSequence, dirac_to_schur, random_schur, schur_to_dirac
from dirac_lab.snode import build_snode
from dirac_lab.taylor import TaylorData, taylor_algebraic, taylor_numeric

SEEDS = range(20)
LENGTHS = (0, 5, 10, 15)
GRID = list(DEFAULT_Z_GRID)


def test_roundtrip_closure(criterion):
    start = time.perf_counter()
    worst = 0.0
    for sig in SIGNATURES:
        for r in LENGTHS:
            for seed in SEEDS:
                pot, _ = schur_to_dirac(random_schur(seed, r, sig, 0.8))
                back, _ = recover_potential(taylor_algebraic(pot))
                rel = np.linalg.norm(back.C - pot.C, 2, axis=(1, 2)) / np.linalg.norm(pot.C, 2, axis=(1, 2))
                worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 60
    criterion("roundtrip closure", ok, f"max rel deviation {worst:.2e} (< 1e-8), {elapsed:.1f} s (< 60 s)")
    assert ok


def test_szego_bijection(criterion):
    worst = 0.0
    for sig in SIGNATURES:
        for r in LENGTHS:
            for seed in SEEDS:
                schur = random_schur(seed, r, sig, 0.8)
                pot, _ = schur_to_dirac(schur)
                worst = max(worst, float(np.abs(dirac_to_schur(pot).rho - schur.rho).max()))
    ok = worst < 1e-9
    criterion("Szego bijection", ok, f"max entry deviation {worst:.2e} (< 1e-9)")
    assert ok


def test_identity_suite(criterion):
    worst = {}
    for sig in SIGNATURES:
        for seed in range(5):
            for r in (0, 5, 15):
                pot, _ = schur_to_dirac(random_schur(seed, r, sig, 0.8))
                for name, value in verify_residuals(pot, GRID).items():
                    key = name.split()[0]
                    worst[key] = max(worst.get(key, 0.0), value)
    ok = max(worst.values()) < 1e-9
    detail = ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
    criterion("identity suite", ok, f"{detail} (each < 1e-9)")
    assert ok


def test_trivial_exactness(criterion):
    errs = []
    for sig in SIGNATURES:
        r = 6
        pot, _ = schur_to_dirac(SchurSequence(sig, np.zeros((r + 1, sig.m1, sig.m2))))
        node = build_snode(pot)
        n = (r + 1) * sig.m2
        pi = np.hstack([np.zeros((n, sig.m1)), np.tile(np.eye(sig.m2), (r + 1, 1))])
        data = taylor_algebraic(pot)
        back, _ = recover_potential(data)
        errs += [
            np.abs(pot.C - np.eye(sig.m)).max(),
            np.abs(node.E - np.eye(n)).max(),
            np.abs(node.S - np.eye(n)).max(),
            np.abs(node.Pi - pi).max(),
            np.abs(data.phi).max(),
            np.abs(back.C - np.eye(sig.m)).max(),
        ]
    worst = float(max(errs))
    ok = worst < 1e-12
    criterion("trivial-case exactness", ok, f"max error {worst:.1e} (< 1e-12)")
    assert ok


def test_structured_equivalence(criterion):
    worst = 0.0
    worst_s00 = 0.0
    rng = np.random.default_rng(0)
    for sig in SIGNATURES:
        for seed in range(5):
            for r in (0, 3, 10, 15):
                pot, _ = schur_to_dirac(random_schur(seed, r, sig, 0.8))
                generic = rng.standard_normal((r + 1, sig.m2, sig.m1)) + 1j * rng.standard_normal((r + 1, sig.m2, sig.m1))
                for data in (taylor_algebraic(pot), TaylorData(sig, generic)):
                    s = structured_S(data)
                    worst = max(worst, float(np.abs(s - solve_identity(node_pi(data), sig)).max()))
                    phi0 = data.phi[0]
                    s00 = np.eye(sig.m2) - phi0 @ phi0.conj().T
                    worst_s00 = max(worst_s00, float(np.abs(s[: sig.m2, : sig.m2] - s00).max()))
    ok = worst < 1e-10 and worst_s00 < 1e-14
    criterion("structured-matrix equivalence", ok,
              f"max entry gap {worst:.1e} (< 1e-10), s_00 gap {worst_s00:.1e}")
    assert ok


def test_taylor_cross_validation(criterion):
    rng = np.random.default_rng(1)
    worst_cross = 0.0
    worst_param = 0.0
    for sig in SIGNATURES:
        for seed in range(3):
            for r in (0, 5, 10):
                pot, _ = schur_to_dirac(random_schur(seed, r, sig, 0.8))
                numeric = taylor_numeric(pot).phi
                worst_cross = max(worst_cross, float(np.abs(numeric - taylor_algebraic(pot).phi).max()))
                other = taylor_numeric(pot, p=random_parameter(rng, sig)).phi
                worst_param = max(worst_param, float(np.abs(other - numeric).max()))
    ok = worst_cross < 1e-6 and worst_param < 1e-6
    criterion("Taylor cross-validation", ok,
              f"numeric vs algebraic {worst_cross:.1e}, parameter change {worst_param:.1e} (each < 1e-6)")
    assert ok


def test_borg_marchenko(criterion):
    results = []
    worst = 0.0
    for sig in SIGNATURES:
        for p in (0, 2, 5):
            r = 8
            a = random_schur(100 + p, r, sig, 0.8)
            rho = a.rho.copy()
            rho[p + 1 :] = random_schur(200 + p, r, sig, 0.8).rho[p + 1 :]
            ta = taylor_algebraic(schur_to_dirac(a)[0])
            tb = taylor_algebraic(schur_to_dirac(SchurSequence(sig, rho))[0])
            results.append(borg_marchenko_compare(ta, tb) == p)
            ca, _ = recover_potential(ta)
            cb, _ = recover_potential(tb)
            for k in range(p + 1):
                worst = max(worst, float(np.linalg.norm(ca.C[k] - cb.C[k], 2) / np.linalg.norm(ca.C[k], 2)))
    ok = all(results) and worst < 1e-8
    criterion("Borg-Marchenko", ok,
              f"agreement index correct in {sum(results)}/{len(results)} cases, recoveries differ by {worst:.1e} (< 1e-8)")
    assert ok


def test_weyl_properties(criterion):
    rng = np.random.default_rng(2)
    worst_norm = 0.0
    worst_form = np.inf
    worst_sum = np.inf
    for sig in SIGNATURES:
        pot, _ = schur_to_dirac(random_schur(3, 10, sig, 0.8))
        for z in GRID:
            fv = fundamental_solution(pot, z)
            for _ in range(10):
                phi = weyl_mobius(fv, random_parameter(rng, sig), sig)
                worst_norm = max(worst_norm, float(np.linalg.norm(phi, 2)))
                for r in range(pot.r + 1):
                    rep = weyl_disk_membership(pot, phi, r, z)
                    worst_form = min(worst_form, rep.min_eig_form / rep.form_scale)
                    worst_sum = min(worst_sum, rep.partial_sum_gap / rep.partial_sum_scale)
    ok = worst_norm <= 1 + 1e-9 and worst_form >= -1e-9 and worst_sum >= -1e-9
    criterion("Weyl-function properties", ok,
              f"max norm {worst_norm:.12f} (<= 1 + 1e-9), min relative disk margins {worst_form:.1e}, {worst_sum:.1e}")
    assert ok


def test_negative_path(criterion, tmp_path, capsys):
    data = TaylorData(Signature(2, 1), [[[0.9, 0.9]], [[0.0, 0.0]]])
    assert np.linalg.norm(data.phi[0], 2) > 1
    src = tmp_path / "taylor.json"
    src.write_text(docio.dumps(docio.taylor_document(data)))
    code = main(["invert", "--input", str(src), "--output", str(tmp_path / "p.json"),
                 "--json-report", str(tmp_path / "r.json")])
    level = json.loads((tmp_path / "r.json").read_text())["data"].get("level")
    err = capsys.readouterr().err
    ok = code == 2 and level == 0 and "level 0" in err
    criterion("negative path", ok, f"exit code {code}, reported level {level}")
    assert ok
