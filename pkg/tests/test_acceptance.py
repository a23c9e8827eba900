"""Acceptance gate: one test per criterion, each recorded for the summary.

Run ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines appear in the
terminal summary under "acceptance criteria".
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from eonsurv import harness, metrics, topology as topo, workload
from eonsurv.failure import Failure, FailureScenario, enumerate_scenarios, recover
from eonsurv.protection import Request, Scheme, provision, sharable, teardown
from eonsurv.spectrum import FREE, Mode, SpectrumGrid, find_first_fit
from eonsurv.timing import TimingParams, rt_dpp, rt_spp

from conftest import ACCEPTANCE, A, B, C, D
from oracles import brute_first_fit, random_grid

REL = 1e-9


def record(name, ok, detail):
    ACCEPTANCE[name] = (bool(ok), detail)
    assert ok, detail


def hand_rt(p, n, l, cross):
    """Exact rational evaluation of the recovery-time sum."""
    fr = lambda x: Fraction(x)  # noqa: E731
    total = fr(p.f_d) + 2 * n * (fr(p.m_p) + fr(p.m_a)) + 2 * fr(l) * fr(p.prop_rate)
    return total + (n * fr(p.c_x) if cross else 0)


def random_params(rng):
    return TimingParams(*(rng.uniform(0, 3000) for _ in range(6)))


def test_formula_exactness():
    rng = random.Random(20)
    cases = [(TimingParams(), 3, 170)]
    cases += [(random_params(rng), rng.randint(0, 15), rng.uniform(0, 8000)) for _ in range(19)]
    t0 = time.perf_counter()
    worst = 0.0
    for p, n, l in cases:
        for fn, cross in ((rt_spp, True), (rt_dpp, False)):
            want = hand_rt(p, n, l, cross)
            got = fn(p, n, l).total
            err = abs(Fraction(got) - want) / max(want, 1)
            worst = max(worst, float(err))
    ex = (rt_spp(TimingParams(), 3, 170).total, rt_dpp(TimingParams(), 3, 170).total)
    elapsed = time.perf_counter() - t0
    ok = worst <= REL and ex == pytest.approx((7730, 1730), rel=REL) and elapsed < 1
    record("formula exactness", ok,
           f"20 tuples, worst rel err {worst:.2e}, worked example {ex[0]:.6f}/{ex[1]:.6f} us, {elapsed:.3f}s")


def test_identity_cross_connect():
    rng = random.Random(1000)
    t0 = time.perf_counter()
    exact_components = 0
    worst = 0.0
    for _ in range(1000):
        p, n, l = random_params(rng), rng.randint(0, 30), rng.uniform(0, 10000)
        spp, dpp = rt_spp(p, n, l), rt_dpp(p, n, l)
        same = (spp.detection, spp.processing, spp.propagation) == (dpp.detection, dpp.processing, dpp.propagation)
        exact_components += same and spp.cross_connect - dpp.cross_connect == n * p.c_x
        diff = spp.total - dpp.total
        worst = max(worst, abs(diff - n * p.c_x) / max(n * p.c_x, 1))
    elapsed = time.perf_counter() - t0
    ok = exact_components == 1000 and worst <= REL and elapsed < 1
    record("identity n*c_x", ok,
           f"{exact_components}/1000 exact in components, totals within {worst:.1e} rel, {elapsed:.3f}s")


def test_spectrum_oracle():
    rng = random.Random(10_000)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(10_000):
        cap, n_links = rng.randint(1, 16), rng.randint(1, 4)
        grid = random_grid(rng, n_links, cap)
        links = rng.sample(range(n_links), rng.randint(1, n_links))
        fr = rng.randint(1, cap)
        mode = rng.choice(list(Mode))
        allowed = set(rng.sample(range(6), rng.randint(0, 6)))
        pred = rng.choice([None, allowed.__contains__])
        want = brute_first_fit(grid, links, fr, mode, pred)
        got = find_first_fit(grid, links, fr, mode, 99, pred)
        mismatches += (None if got is None else got.start) != want
    elapsed = time.perf_counter() - t0
    record("spectrum oracle", mismatches == 0 and elapsed < 10,
           f"10000 instances, {mismatches} mismatches, {elapsed:.2f}s")


def full_grid_check(grid, conns, topology):
    """Every constraint, recomputed from the live connection set."""
    grid.check_invariants()
    working = np.full_like(grid._working, FREE)
    backups = [dict() for _ in range(grid.n_links)]
    for c in conns.values():
        fr = c.request.fr
        for path, block in ((c.primary, c.primary_block), (c.backup, c.backup_block)):
            assert block.size == fr and 0 <= block.start and block.stop <= grid.capacity
            assert (path.source, path.destination) == (c.request.source, c.request.destination)
            for (u, v), link in zip(zip(path.nodes, path.nodes[1:]), path.links):
                assert topology.links[link].endpoints == {u, v}
        assert not c.primary.link_set & c.backup.link_set
        for link in c.primary.links:
            # one contiguous run at the same indices on every hop
            assert (working[link, c.primary_block.start:c.primary_block.stop] == FREE).all()
            working[link, c.primary_block.start:c.primary_block.stop] = c.id
        for link in c.backup.links:
            for slot in c.backup_block.slots():
                backups[link].setdefault(slot, set()).add(c.id)
    assert (working == grid._working).all()
    for link in range(grid.n_links):
        assert backups[link] == {s: set(o) for s, o in grid._sharers[link].items()}
        for owners in backups[link].values():
            if len(owners) > 1:
                owners = sorted(owners)
                for i, a in enumerate(owners):
                    for b in owners[i + 1:]:
                        assert sharable(conns[a], conns[b])


def test_constraint_suite():
    t = topo.load_builtin("COST239", slot_capacity=12)
    params = TimingParams.for_topology("COST239")
    rng = random.Random(5)
    steps = 100_000
    t0 = time.perf_counter()
    grid, conns = SpectrumGrid.for_topology(t), {}
    next_id = accepted = torn = 0
    violation = None
    try:
        for step in range(steps):
            if conns and rng.random() < 0.45:
                teardown(grid, conns[rng.choice(list(conns))], conns)
                torn += 1
            else:
                s, d = rng.sample(range(t.n_nodes), 2)
                req = Request(next_id, s, d, rng.randint(1, 4))
                next_id += 1
                out = provision(rng.choice(list(Scheme)), grid, t, params, req, conns)
                if out.accepted:
                    accepted += 1
                    assert out.connection.worst_rt.total <= params.rtc
            full_grid_check(grid, conns, t)
    except AssertionError as exc:
        violation = f"step {step}: {exc}"
    elapsed = time.perf_counter() - t0
    ok = violation is None and elapsed < 60
    record("constraint suite", ok,
           f"{steps} steps ({accepted} accepted, {torn} teardowns), "
           f"{'no violations' if violation is None else violation}, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def default_runs():
    out = {}
    for name in ("ARPANET", "COST239"):
        t0 = time.perf_counter()
        out[name] = (harness.run_experiment(harness.ExperimentConfig(topology=name)), time.perf_counter() - t0)
    return out


def test_scheme_orderings(default_runs):
    failures, parts, total = [], [], 0.0
    for name, (res, elapsed) in default_runs.items():
        total += elapsed
        s = {k: res.summary[k] for k in ("dpp", "spp", "incb")}
        checks = {
            "BBP incb<=spp": s["incb"]["bbp"] <= s["spp"]["bbp"],
            "BBP spp<dpp": s["spp"]["bbp"] < s["dpp"]["bbp"],
            "RT incb<dpp": s["incb"]["rt_us"] < s["dpp"]["rt_us"],
            "RT dpp<spp": s["dpp"]["rt_us"] < s["spp"]["rt_us"],
            "BPR incb<=spp": s["incb"]["bpr"] <= s["spp"]["bpr"],
            "BPR spp<dpp": s["spp"]["bpr"] < s["dpp"]["bpr"],
        }
        failures += [f"{name} {k}" for k, v in checks.items() if not v]
        parts.append(f"{name} BBP {s['dpp']['bbp']:.4f}/{s['spp']['bbp']:.4f}/{s['incb']['bbp']:.4f} "
                     f"RT {s['dpp']['rt_us']:.0f}/{s['spp']['rt_us']:.0f}/{s['incb']['rt_us']:.0f} "
                     f"BPR {s['dpp']['bpr']:.3f}/{s['spp']['bpr']:.3f}/{s['incb']['bpr']:.3f}")
    ok = not failures and total < 300
    detail = "; ".join(parts) + f" (dpp/spp/incb), {total:.1f}s"
    record("scheme orderings", ok, detail if ok else f"violated {failures}; {detail}")


def full_load_bbp(name, scheme, params, seeds=range(1, 6)):
    t = topo.load_builtin(name)
    values, worst_excess = [], 0.0
    for seed in seeds:
        grid, conns = SpectrumGrid.for_topology(t), {}
        outs = [provision(scheme, grid, t, params, r, conns)
                for r in workload.generate(t, workload.WorkloadSpec(t.pair_count, seed=seed))]
        values.append(metrics.bbp(outs))
        for c in conns.values():
            worst_excess = max(worst_excess, c.worst_rt.total - params.rtc)
    return sum(values) / len(values), worst_excess


def test_rtc_gating():
    lines, ok = [], True
    for name in ("ARPANET", "COST239"):
        params = TimingParams.for_topology(name)
        tight = TimingParams.for_topology(name, rtc=1000)
        for scheme in Scheme:
            base, excess = full_load_bbp(name, scheme, params)
            low, _ = full_load_bbp(name, scheme, tight)
            ok &= excess <= 0 and low > base
            lines.append(f"{name}/{scheme.value} worst_rt <= {params.rtc:.0f}us: {excess <= 0}, "
                         f"BBP {base:.3f}->{low:.3f}")
    record("RTC gating", ok, "; ".join(lines))


def test_dual_failure_cases(kite):
    t0 = time.perf_counter()
    p = TimingParams()
    ca, ba, cd = (kite.link_between(u, v).id for u, v in ((C, A), (B, A), (C, D)))
    notes, ok = [], True
    for scheme in Scheme:
        grid, conns = SpectrumGrid.for_topology(kite), {}
        provision(scheme, grid, kite, p, Request(0, C, A, 1), conns)
        provision(scheme, grid, kite, p, Request(1, B, A, 1), conns)
        case_a = recover(FailureScenario(ca, ba), conns, grid, p)
        case_b = recover(FailureScenario(ca, cd), conns, grid, p)
        winners = sum(o.recovered for o in case_a)
        if scheme is Scheme.DPP:
            ok &= winners == 2
        else:
            ok &= winners == 1 and [o.reason for o in case_a if not o.recovered] == [Failure.CONTENTION_LOST]
        if scheme is Scheme.INCB:
            ok &= len(case_b) == 1 and case_b[0].recovered
        else:
            ok &= len(case_b) == 1 and case_b[0].reason is Failure.BACKUP_ALSO_FAILED
        notes.append(f"{scheme.value}: (a) {winners}/2 recover, (b) "
                     f"{'recovered via PBR' if case_b[0].recovered else case_b[0].reason.value}")
    elapsed = time.perf_counter() - t0
    record("dual-failure case fidelity", ok and elapsed < 1, "; ".join(notes) + f", {elapsed:.3f}s")


def test_scenario_counts():
    got = {n: len(enumerate_scenarios(topo.load_builtin(n))) for n in ("ARPANET", "COST239")}
    record("scenario counts", got == {"ARPANET": 496, "COST239": 325}, f"{got}")


def test_determinism(default_runs, tmp_path):
    diffs, n_files = [], 0
    for name, (first, _) in default_runs.items():
        second = harness.run_experiment(harness.ExperimentConfig(topology=name))
        a = harness.emit(first, tmp_path / f"{name}-a")
        b = harness.emit(second, tmp_path / f"{name}-b")
        n_files += len(a)
        diffs += [f"{name}/{x.name}" for x, y in zip(a, b) if x.read_bytes() != y.read_bytes()]
        diffs += [f"{name} file list"] if [x.name for x in a] != [y.name for y in b] else []
    record("determinism", not diffs, f"{n_files} files compared, differing: {diffs or 'none'}")
