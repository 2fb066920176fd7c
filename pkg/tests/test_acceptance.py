"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the terminal summary.
"""
import contextlib
import time

import numpy as np
import pytest

from txrx_duality import (ChannelSet, SolveOptions, Status, constraint_system, draw_channels,
                          gain_tensor, sinr_downlink, sinr_uplink, solve, solve_downlink_powers,
                          update_receive_filters, update_transmit_filters)
from txrx_duality.harness import (ExperimentSpec, paper_config, run_sweep_gamma,
                                  run_sweep_weight, summarize, verify_link)
from txrx_duality.sinr import (downlink_covariances, sinr_downlink_from_gains,
                               uplink_covariances)

from conftest import ACCEPTANCE_LINES, random_state, scalar_config
from oracles import fixed_point_powers, rayleigh
from test_solver import two_user_miso

pytestmark = pytest.mark.slow


@contextlib.contextmanager
def criterion(n, title):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE_LINES.append(f"ACCEPTANCE {n} FAIL: {title} ({msg[:160]})")
        raise
    detail = info.get('detail', '')
    ACCEPTANCE_LINES.append(f"ACCEPTANCE {n} PASS: {title} [{detail}; "
                            f"{time.perf_counter() - t0:.1f} s]")


def converged_instances(count, Ks=(2, 3, 4), gamma_db=10.0):
    """First ``count`` converged runs, cycling K through ``Ks`` over seeds."""
    out, seed = [], 0
    while len(out) < count:
        K = Ks[seed % len(Ks)]
        cfg = paper_config(K=K, gamma_db=gamma_db)
        ch = draw_channels(cfg, seed)
        rep = solve(cfg, ch, seed=seed)
        if rep.converged:
            out.append((cfg, ch, rep))
        seed += 1
        assert seed < 10 * count, "too few converged instances"
    return out, seed


@pytest.fixture(scope='module')
def fifty():
    t0 = time.perf_counter()
    inst, tried = converged_instances(50)
    return inst, tried, time.perf_counter() - t0


def test_1_scalar_closed_form():
    with criterion(1, "scalar closed form p = 4") as info:
        rep = solve(scalar_config(gamma=4.0, sigma2=1.0, w=1.0), ChannelSet([np.ones((1, 1))]))
        assert rep.status is Status.CONVERGED
        assert rep.iterations <= 3, rep.iterations
        assert abs(rep.state.p[0] - 4.0) <= 1e-10, rep.state.p
        assert rep.audit.gap < 1e-12, rep.audit.gap
        info['detail'] = f"p={rep.state.p[0]:.12g}, iters={rep.iterations}, gap={rep.audit.gap:.1e}"


def test_2_all_constraints_active(fifty):
    with criterion(2, "50 converged instances meet every target within 0.01 dB") as info:
        inst, tried, elapsed = fifty
        worst = 0.0
        for cfg, ch, rep in inst:
            target = 10 * np.log10(cfg.gamma)
            for sinr in (sinr_downlink(rep.state, ch, cfg), sinr_uplink(rep.state, ch, cfg)):
                worst = max(worst, float(np.max(np.abs(10 * np.log10(sinr) - target))))
        assert worst <= 0.01, f"worst deviation {worst:.3g} dB"
        assert elapsed < 30, f"took {elapsed:.1f} s"
        info['detail'] = f"worst {worst:.1e} dB, {tried} seeds tried, solve time {elapsed:.1f} s"


def test_3_duality_gap(fifty):
    with criterion(3, "duality gap < 1e-6, per-iteration identity < 1e-9") as info:
        inst, _, _ = fifty
        gap = max(rep.audit.gap for _, _, rep in inst)
        ident = max(r.identity_gap for _, _, rep in inst for r in rep.trace)
        assert gap < 1e-6, f"gap {gap:.3g}"
        assert ident < 1e-9, f"identity {ident:.3g}"
        info['detail'] = f"max gap {gap:.1e}, max identity {ident:.1e}"


def test_4_fixed_point_oracle():
    with criterion(4, "downlink power solve matches fixed-point oracle (20 instances)") as info:
        worst = 0.0
        for seed in range(20):
            cfg, ch, s, g = two_user_miso(seed)
            p = solve_downlink_powers(s, ch, cfg)
            ref = fixed_point_powers(g, cfg.gamma_flat, cfg.sigma2 * np.ones(2))
            worst = max(worst, float(np.max(np.abs(p - ref) / ref)))
        assert worst <= 1e-8, f"relative error {worst:.3g}"
        info['detail'] = f"max relative error {worst:.1e}"


def test_5_power_grows_with_target_and_users():
    with criterion(5, "total power increases in gamma and K (100 seeds)") as info:
        t0 = time.perf_counter()
        grid = (-10.0, -5.0, 0.0, 5.0, 10.0)
        means = {}
        for K in (2, 3, 4):
            spec = ExperimentSpec(kind='sweep_gamma', config=paper_config(K=K), values=grid,
                                  trials=100)
            means[K] = np.array([s.mean_total_power_db
                                 for s in summarize(run_sweep_gamma(spec))])
        elapsed = time.perf_counter() - t0
        for K, m in means.items():
            assert np.all(np.diff(m) > 0), f"K={K}: {np.round(m, 2)}"
        for a, b in ((2, 3), (3, 4)):
            assert np.all(means[b] > means[a]), f"K={a} vs K={b}"
        assert elapsed < 300, f"took {elapsed:.0f} s"
        info['detail'] = "; ".join(f"K={K}: " + " ".join(f"{x:.2f}" for x in m)
                                   for K, m in means.items()) + f" dB; {elapsed:.0f} s"


def test_6_feasibility_cliff():
    with criterion(6, "K=8: Infeasible >= 80% at 10 dB, Converged >= 50% at 0 dB") as info:
        counts = {}
        for gamma_db in (10.0, 0.0):
            cfg = paper_config(K=8, gamma_db=gamma_db)
            statuses = [solve(cfg, draw_channels(cfg, s), seed=s).status for s in range(50)]
            counts[gamma_db] = statuses
        infeasible10 = sum(s is Status.INFEASIBLE for s in counts[10.0]) / 50
        converged0 = sum(s is Status.CONVERGED for s in counts[0.0]) / 50
        info['detail'] = f"infeasible@10dB {infeasible10:.0%}, converged@0dB {converged0:.0%}"
        assert infeasible10 >= 0.8, info['detail']
        # 16 streams at 0 dB saturate the 8 transmit antennas (sum gamma/(1+gamma) = M),
        # which no finite power achieves with positive noise.
        assert converged0 >= 0.5, info['detail']


def test_7_cell_edge_weighting():
    with criterion(7, "weight 1->20: MS1 drop in [7,13] dB, total rise <= 2.5 dB") as info:
        spec = ExperimentSpec(kind='sweep_weight', config=paper_config(K=4, gamma_db=10.0),
                              values=(1.0, 2.0, 5.0, 10.0, 20.0), trials=100)
        s = summarize(run_sweep_weight(spec))
        ms1 = np.array([x.mean_user1_power_db for x in s])
        total = np.array([x.mean_total_power_db for x in s])
        drop, rise = ms1[0] - ms1[-1], total[-1] - total[0]
        info['detail'] = (f"MS1 {' '.join(f'{x:.2f}' for x in ms1)} dB, drop {drop:.2f} dB, "
                          f"total rise {rise:.2f} dB, feasible {sum(x.feasible for x in s)}/500")
        assert 7 <= drop <= 13, info['detail']
        assert rise <= 2.5, info['detail']
        assert np.all(np.diff(ms1) <= 0), info['detail']


def test_8_link_level():
    with criterion(8, "QPSK link SINR within 0.3 dB of target (10 instances)") as info:
        inst, _ = converged_instances(10, Ks=(4,))
        worst = max(verify_link(rep, ch, cfg, n_sym=100_000, seed=i).max_deviation_db
                    for i, (cfg, ch, rep) in enumerate(inst))
        assert worst <= 0.3, f"{worst:.3f} dB"
        info['detail'] = f"worst deviation {worst:.3f} dB"


def _instance(seed):
    from txrx_duality import SystemConfig
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(M=6, K=3, N=2, L=2, gamma=rng.uniform(0.5, 5, (3, 2)),
                       w=rng.uniform(0.5, 3, 6), sigma2=rng.uniform(0.1, 2))
    return cfg, draw_channels(cfg, seed), random_state(cfg, rng), rng


def test_9_property_suites():
    with criterion(9, "SINR forms, phase invariance, sign pattern, optimality, "
                      "monotonicity") as info:
        for seed in range(20):
            cfg, ch, s, rng = _instance(seed)
            dl, ul = sinr_downlink(s, ch, cfg), sinr_uplink(s, ch, cfg)
            gains = gain_tensor(s, ch, cfg)
            a2 = np.concatenate([np.sum(np.abs(a) ** 2, axis=0) for a in s.A])
            np.testing.assert_allclose(dl, sinr_downlink_from_gains(gains, s.p, a2, cfg.sigma2),
                                       rtol=1e-10)
            r = s.copy()
            r.A[0][:, 1] *= np.exp(1j * rng.uniform(0, 2 * np.pi))
            r.B[2][:, 0] *= np.exp(1j * rng.uniform(0, 2 * np.pi))
            np.testing.assert_allclose(sinr_downlink(r, ch, cfg), dl, rtol=1e-12)
            np.testing.assert_allclose(sinr_uplink(r, ch, cfg), ul, rtol=1e-12)
            C = constraint_system(s, ch, cfg).C
            assert np.all(np.diag(C) < 0) and np.all(C[~np.eye(cfg.KL, dtype=bool)] >= 0)

            rx = update_receive_filters(s, ch, cfg)
            tx = update_transmit_filters(s, ch, cfg)
            S_ul, Q_ul = uplink_covariances(s, ch, cfg)
            for k in range(cfg.K):
                S, Q = downlink_covariances(s, ch, cfg, k)
                for j in range(cfg.L):
                    V = rng.standard_normal((100, 2)) + 1j * rng.standard_normal((100, 2))
                    best = rayleigh(rx.A[k][:, j], S[j], Q[j])
                    assert max(rayleigh(v, S[j], Q[j]) for v in V) <= best * (1 + 1e-12)
                    i = k * cfg.L + j
                    V = rng.standard_normal((100, 6)) + 1j * rng.standard_normal((100, 6))
                    best = rayleigh(tx.B[k][:, j], S_ul[i], Q_ul[i])
                    assert max(rayleigh(v, S_ul[i], Q_ul[i]) for v in V) <= best * (1 + 1e-12)

            # raising one downlink power helps that stream and hurts no other
            G = gains.as_matrix()
            idx = int(rng.integers(cfg.KL))
            bumped = s.copy()
            bumped.p[idx] *= 1.5
            new = sinr_downlink(bumped, ch, cfg).ravel()
            assert new[idx] > dl.ravel()[idx]
            others = [i for i in range(cfg.KL) if i != idx and G[i, idx] > 1e-12]
            assert np.all(new[others] < dl.ravel()[others])
        info['detail'] = "20 random instances"
