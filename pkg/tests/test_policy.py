import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlnc_tdd.markov import NonAbsorbingChainError, mean_completion_time
from rlnc_tdd.model import (ChannelParams, SystemParams, fig4_params, packet_duration,
                            round_duration, wait_time)
from rlnc_tdd.policy import (LinkParams, Policy, Provenance, combined_params,
                             exhaustive_search, heuristic_combined, heuristic_worst_link,
                             link_time, optimize_exact, optimize_link, search_windows,
                             worst_link_params)


def two_rx(pe1, pe2, M=3, pa=(0.0, 0.0), **kw):
    chans = (ChannelParams(pe1, pa[0], 0.1), ChannelParams(pe2, pa[1], 0.1))
    kw = {**dict(R=1e6, n=2000, h=40, g=8, n_ack=40), **kw}
    return SystemParams(M=M, N=2, channels=chans, **kw)


# ------------------------------------------------------------------- table

def test_policy_invariants():
    with pytest.raises(ValueError):
        Policy((1, 1))
    with pytest.raises(ValueError):
        Policy((1, 2, 200))
    assert Policy.minimal(3).bursts == (1, 2, 3)


def test_policy_file_roundtrip(tmp_path):
    pol = Policy((3, 5, 8), Provenance.WORST_LINK)
    path = tmp_path / "policy.txt"
    pol.save(path)
    text = path.read_text()
    assert text == "# M=3 provenance=WorstLink\n1 3\n2 5\n3 8\n"
    assert Policy.load(path) == pol


@pytest.mark.parametrize("text", ["1 2\n", "# M=2 provenance=Optimal\n1 1\n",
                                  "# M=2 provenance=Nope\n1 1\n2 2\n",
                                  "# M=2 provenance=Manual\n1 1\n3 3\n"])
def test_policy_file_errors(text):
    with pytest.raises(ValueError):
        Policy.from_text(text)


# --------------------------------------------------------------------- link

def test_link_lossless():
    p = fig4_params(0.0, N=1)
    pol = optimize_link(LinkParams(0.0, 0.0, p))
    assert pol.bursts == (1, 2, 3, 4, 5)
    assert link_time(LinkParams(0.0, 0.0, p), pol) == 5 * packet_duration(p) + wait_time(p)


@pytest.mark.parametrize("pe,pa", [(0.1, 0.0), (0.5, 0.0), (0.8, 0.1), (0.95, 0.3)])
def test_link_single_packet_matches_exhaustive_scan(pe, pa):
    p = fig4_params(pe, M=1, N=1)
    pol = optimize_link(LinkParams(pe, pa, p))

    def objective(k):
        pe_eff = (1 - pa) * pe ** k + pa
        return round_duration(p, k) / (1 - pe_eff)

    best = min(range(1, 201), key=lambda k: (objective(k), k))
    assert pol.bursts == (best,)


def test_link_rejects_dead_channel():
    with pytest.raises(NonAbsorbingChainError):
        optimize_link(LinkParams(1.0, 0.0, fig4_params(N=1)))


@pytest.mark.parametrize("seed", range(3))
def test_link_equals_broadcast_optimizer_for_one_receiver(seed):
    rng = np.random.default_rng(seed)
    p = fig4_params(float(rng.uniform(0.1, 0.8)), M=4, N=1, pe_ack=float(rng.uniform(0, 0.2)))
    link = optimize_link(LinkParams(p.pe[0], p.pe_ack[0], p))
    exact = optimize_exact(p)
    assert exact.policy.bursts == link.bursts
    assert exact.objective == pytest.approx(mean_completion_time(link, p).mean_time, rel=1e-12)


# --------------------------------------------------------------- heuristics

def test_heuristics_single_receiver_coincide():
    p = fig4_params(0.4, N=1)
    link = optimize_link(LinkParams(0.4, 0.0, p))
    assert heuristic_worst_link(p).bursts == link.bursts
    assert heuristic_combined(p).bursts == link.bursts


def test_heuristic_parameters():
    p = two_rx(0.2, 0.5, pa=(0.1, 0.0))
    assert worst_link_params(p).pe == 0.5 and worst_link_params(p).pe_ack == 0.1
    c = combined_params(two_rx(0.5, 0.5))
    assert c.pe == pytest.approx(0.75)
    assert heuristic_worst_link(p).bursts == optimize_link(LinkParams(0.5, 0.1, p)).bursts


def test_heuristics_differ_on_symmetric_lossy():
    p = fig4_params(0.5)
    assert heuristic_worst_link(p).bursts != heuristic_combined(p).bursts
    q = fig4_params(0.0)
    assert heuristic_worst_link(q).bursts == heuristic_combined(q).bursts


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 0.9), min_size=1, max_size=4),
       st.lists(st.floats(0.0, 0.3), min_size=4, max_size=4))
def test_combined_erasure_dominates_worst(pes, pas):
    chans = tuple(ChannelParams(a, b) for a, b in zip(pes, pas))
    p = SystemParams(M=3, N=len(chans), R=1e6, n=1000, h=0, g=8, n_ack=10, channels=chans)
    assert combined_params(p).pe >= worst_link_params(p).pe - 1e-15
    assert combined_params(p).pe_ack >= worst_link_params(p).pe_ack - 1e-15


# -------------------------------------------------------------- broadcast

def test_exact_lossless():
    res = optimize_exact(fig4_params(0.0))
    assert res.policy.bursts == (1, 2, 3, 4, 5)


@pytest.mark.parametrize("pe1,pe2", [(0.3, 0.3), (0.1, 0.6), (0.5, 0.7)])
def test_exact_matches_exhaustive_on_tiny(pe1, pe2):
    p = two_rx(pe1, pe2, M=2)
    res = optimize_exact(p)
    brute, brute_t = exhaustive_search(p, res.windows)
    assert res.objective == pytest.approx(brute_t, rel=1e-12)
    assert res.policy.bursts == brute.bursts


@pytest.mark.parametrize("pe", [0.1, 0.3, 0.6])
def test_exact_never_worse_than_heuristics(pe):
    p = two_rx(pe, pe + 0.1, M=3, pa=(0.05, 0.0))
    res = optimize_exact(p)
    for h in (heuristic_worst_link(p), heuristic_combined(p)):
        assert res.objective <= mean_completion_time(h, p).mean_time * (1 + 1e-12)
    for i, (lo, hi) in enumerate(res.windows, 1):
        assert lo <= res.policy.burst(i) <= hi


def test_search_windows_contain_heuristics():
    p = fig4_params(0.6)
    wl, ce = heuristic_worst_link(p), heuristic_combined(p)
    for i, (lo, hi) in enumerate(search_windows(p), 1):
        assert lo <= min(wl.burst(i), ce.burst(i)) and max(wl.burst(i), ce.burst(i)) <= hi
        assert lo >= i


@pytest.mark.parametrize("pe1,pe2", [(0.2, 0.2), (0.4, 0.4), (0.2, 0.6), (0.7, 0.7)])
def test_unconstrained_optimum_inside_sandwich(pe1, pe2):
    """Reported property: search a wider grid than the windows and locate the optimum."""
    p = two_rx(pe1, pe2, M=2)
    wide = tuple((i, i + 25) for i in range(1, 3))
    brute, _ = exhaustive_search(p, wide)
    wl, ce = heuristic_worst_link(p), heuristic_combined(p)
    inside = all(wl.burst(i) <= brute.burst(i) <= ce.burst(i) for i in (1, 2))
    print(f"pe=({pe1},{pe2}) optimum={brute.bursts} wl={wl.bursts} ce={ce.bursts} inside={inside}")
    # the exact optimizer's slack must at least reach the true optimum
    res = optimize_exact(p)
    assert res.policy.bursts == brute.bursts


def test_exact_rejects_dead_receiver():
    with pytest.raises(NonAbsorbingChainError):
        optimize_exact(two_rx(0.2, 1.0))
