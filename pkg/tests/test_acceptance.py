"""Acceptance criteria, one test each, with their time limits.

Every criterion records a ``PASS``/``FAIL`` line that is printed in the
pytest terminal summary (and by ``python3 tests/test_acceptance.py``).
"""

import io
import json
import sys
import time
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from arithtoric import bundle, excol, fan as fanmod  # noqa: E402
from arithtoric.arith import BiquadraticField, sha_norm_one_biquadratic  # noqa: E402
from arithtoric.cli import main as cli_main  # noqa: E402
from arithtoric.descent import descend_collection, rationality_check, trivial_action  # noqa: E402
from arithtoric.divclass import canonical_divisor, cohomology, euler_char  # noqa: E402
from arithtoric.excol import ext_dims, line_bundle, numerical_fullness, verify_exceptional_collection  # noqa: E402
from arithtoric.fan import build_an_fan, fan_aut, is_complete, is_smooth, projective_line  # noqa: E402
from arithtoric.gmodule import (KLEIN_AUGMENTATION_BASIS, augmentation_ideal, h1, klein_four,  # noqa: E402
                                module_isomorphic)
from arithtoric.zlattice import equal, identity  # noqa: E402

RESULTS: list[str] = []


def _record(number, title, ok, elapsed, limit, detail=""):
    ok = ok and elapsed < limit
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({elapsed:.2f} s, limit {limit:g} s)"
    if detail:
        line += f" {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _fan(n):
    return bundle.load_fan(f"bundled:fan_a{n}")


def _collection(n):
    return bundle.load_collection(f"bundled:ct_a{n}", _fan(n))


def _action(name, n=3):
    return bundle.load_action(f"bundled:{name}", _fan(n))


def test_criterion_01_fan_inventory():
    t = time.perf_counter()
    f = build_an_fan(3)
    ok = f.n_rays == 14 and len(f.max_cones) == 24 and is_smooth(f) and is_complete(f)
    assert _record(1, "A3 fan has 14 rays, 24 smooth maximal cones, complete", ok, time.perf_counter() - t, 1)


def test_criterion_02_automorphisms():
    fanmod._AUT_CACHE.clear()
    t = time.perf_counter()
    g = fan_aut(build_an_fan(3)).group
    q = g.quotient(g.center())
    ok = (g.order == 48 and len(g.center()) == 2 and q.order == 24 and len(q.center()) == 1
          and q.order_census() == {1: 1, 2: 9, 3: 8, 4: 6}
          and g.order_census() == {1: 1, 2: 19, 3: 8, 4: 12, 6: 8})
    assert _record(2, "Aut(A3 fan) has order 48, center C2, quotient S4", ok, time.perf_counter() - t, 10,
                   f"census {g.order_census()}")


def test_criterion_03_lattice_identification():
    t = time.perf_counter()
    a = _action("action_a3_biquadratic")
    s, tau = a.matrix(1), a.matrix(2)
    relations = (equal(s.dot(s), identity(3)) and equal(tau.dot(tau), identity(3))
                 and equal(s.dot(tau), tau.dot(s)))
    verbatim = (equal(s, [[-1, 0, 0], [0, 0, -1], [0, -1, 0]]) and equal(tau, [[1, 0, 0], [1, -1, 0], [1, 0, -1]]))
    p = module_isomorphic(augmentation_ideal(klein_four(), KLEIN_AUGMENTATION_BASIS), a.n_lattice())
    ok = relations and verbatim and p is not None and equal(p, identity(3))
    assert _record(3, "Klein generators satisfy C2xC2 relations; N = augmentation ideal via identity", ok,
                   time.perf_counter() - t, 60)


def test_criterion_04_sha():
    t = time.perf_counter()
    r1 = sha_norm_one_biquadratic(BiquadraticField(5, 29))
    r2 = sha_norm_one_biquadratic(BiquadraticField(5, 13))
    ok = (str(r1.group) == "Z/2" and r1.method == "AllCyclicDecomposition" and r2.group.is_trivial)
    assert _record(4, "Sha(5,29) = Z/2 and Sha(5,13) trivial", ok, time.perf_counter() - t, 1)


def test_criterion_05_cohomology_engine():
    t = time.perf_counter()
    ok = True
    rng = np.random.default_rng(5)
    for f in (projective_line(), build_an_fan(2), build_an_fan(3)):
        k = canonical_divisor(f)
        for _ in range(50):
            d = [int(x) for x in rng.integers(-3, 4, size=f.n_rays)]
            ok &= tuple(cohomology(f, d)) == tuple(reversed(tuple(cohomology(f, [a - b for a, b in zip(k, d)]))))
    ok &= all(euler_char(projective_line(), (d, 0)) == d + 1 for d in range(-5, 6))
    ok &= cohomology(build_an_fan(2), (1,) * 6)[0] == 7
    assert _record(5, "Serre duality on 3x50 divisors, chi(O(d)) on P1, h0(-K dP6) = 7", bool(ok),
                   time.perf_counter() - t, 120)


def test_criterion_06_oracle_equivalence():
    t = time.perf_counter()
    ok = True
    rng = np.random.default_rng(6)
    for n in (1, 2, 3):
        f = _fan(n)
        for _ in range(100):
            a = [int(x) for x in rng.integers(-3, 4, size=f.n_rays)]
            b = [int(x) for x in rng.integers(-3, 4, size=f.n_rays)]
            ok &= (tuple(ext_dims(line_bundle(f, a), line_bundle(f, b)))
                   == tuple(cohomology(f, [y - x for x, y in zip(a, b)])))
    assert _record(6, "ext_dims = cohomology on 100 line-bundle pairs per bundled fan", bool(ok),
                   time.perf_counter() - t, 600)


def _verify(n):
    c = _collection(n)
    rep = verify_exceptional_collection(c)
    full = numerical_fullness(c, table=rep.table)
    return rep.passed and full.passed and full.size == len(c.fan.max_cones) and full.determinant in (1, -1)


def test_criterion_07_collection_verification():
    excol._ENGINES.clear()
    t = time.perf_counter()
    small = _verify(1) and _verify(2)
    t_small = time.perf_counter() - t
    t = time.perf_counter()
    big = _verify(3)
    t_big = time.perf_counter() - t
    ok = small and t_small < 60
    assert _record(7, "bundled A3 collection exceptional and numerically full (24 objects); A1, A2 too",
                   ok and big, t_big, 3600, f"[A1+A2 {t_small:.2f} s]")


def test_criterion_08_descent():
    t = time.perf_counter()
    c = _collection(3)
    rep = descend_collection(_action("action_a3_biquadratic"), c)
    ok = sum(rep.orbit_sizes) == 24 and rep.all_vanished
    full = descend_collection(_action("action_a3_full"), c)
    tors = [o for o in full.orbits if c.objects[o.representative].vanishing]
    ok &= len(tors) == 1 and len(tors[0].members) == 6 and tors[0].obstruction.vanished
    assert _record(8, "Klein descent: orbits sum to 24, all obstructions vanish; full Aut: torsion orbit of 6",
                   bool(ok), time.perf_counter() - t, 60, f"orbit sizes {rep.orbit_sizes}")


def test_criterion_09_rationality():
    t = time.perf_counter()
    ok = all(rationality_check(_fan(n), trivial_action(_fan(n))).verdict == "Rational" for n in (1, 2, 3))
    res = rationality_check(_fan(3), _action("action_a3_biquadratic"))
    ok &= res.verdict == "Inconclusive" and bool(res.pic_matrices)
    assert _record(9, "trivial actions Rational; Klein action on A3 Inconclusive with nontrivial Pic action",
                   bool(ok), time.perf_counter() - t, 60, f"H^1(G, Pic) = {res.h1_pic}")


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli_main(list(argv))
    return code, out.getvalue()


def test_criterion_10_certificate():
    t = time.perf_counter()
    base = ["certificate", "bundled:fan_a3", "bundled:ct_a3", "bundled:action_a3_biquadratic",
            "--format", "structured", "--jobs", "1"]
    code, out = _cli(*base)
    body = json.loads(out)
    ok = code == 0 and body["issued"] and len(body["facts"]) == 4
    code2, out2 = _cli(*base, "--biquadratic", "5", "13")
    ok &= code2 == 1 and json.loads(out2)["reason"] == "Zhe trivial"
    assert _record(10, "certificate for (A3, collection, Klein action, (5,29)) exits 0; (5,13) exits 1",
                   bool(ok), time.perf_counter() - t, 1200)


def test_criterion_11_h1_bruteforce():
    from test_gmodule import BOX, SUITE
    t = time.perf_counter()
    ok = True
    for name, l in SUITE.items():
        inv = h1(l)
        ok &= inv.order == oracles.h1_order(l, bound=BOX.get(name, 3))
    from arithtoric.gmodule import cyclic_group, regular_lattice, sign_lattice
    ok &= str(h1(sign_lattice(cyclic_group(2), [1, -1]))) == "Z/2"
    ok &= h1(regular_lattice(klein_four())).is_trivial
    assert _record(11, f"h1 equals boxed cocycle enumeration on {len(SUITE)} lattices", bool(ok),
                   time.perf_counter() - t, 60)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
