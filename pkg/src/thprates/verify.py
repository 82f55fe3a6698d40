"""Cross-module invariant suite behind ``thprates verify``.

Asserted checks gate the exit code. REPORT lines cover the open questions
(the paper's intermediate entropy inequality, self-noise below alpha = 1,
Gaussianity of the residual interference, bound margins at very low SNR):
they are informative only and never fail the run.
"""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np
from scipy import stats

from .bounds import (NoiseModel, asymptote, awgn_capacity,
                     bound_gap_new_vs_original, bound_new,
                     bound_new_from_entropy, bound_original,
                     shaping_loss_bits, shaping_loss_db)
from .channel import RngStream, dpc_chain, gen_channel, mod_t_channel
from .entropy import (TruncatedGaussian, WrappedGaussian,
                      truncated_entropy_closed_form,
                      truncated_entropy_quadrature, wrapped_entropy)
from .modulo import Modulus, mod_t
from .precoder import receiver_decode, synthesize_mmse, synthesize_zf, thp_encode
from .rates import exact_modt_rate, mc_mutual_info, per_user_rate_sim

Check = Tuple[str, str, str]  # name, PASS/FAIL/REPORT, detail

_SNRP_GRID_DB = [(-20 + 2 * i) for i in range(41)]  # -20 .. 60 dB


def _scale_for(snr_prime_lin: float, t: float = 1.0) -> float:
    # alpha*sigma implied by the effective SNR: t / sqrt(12 (1 + snr'))
    return t / math.sqrt(12.0 * (1.0 + snr_prime_lin))


def _check_fig3_ordering() -> Check:
    worst_gap = math.inf
    for db in range(-10, 31):
        snr = 10.0 ** (db / 10.0)
        c, bn, bo = awgn_capacity(snr), bound_new(snr), bound_original(snr)
        if not (c >= bn and bn >= bo):
            return ("fig3 ordering", "FAIL",
                    f"ordering violated at {db} dB: C={c:.6f} new={bn:.6f} orig={bo:.6f}")
        if db < 20:
            gap = bound_gap_new_vs_original(snr)
            cgap = c - bn
            if gap <= 0.0 or cgap <= 0.0:
                return ("fig3 ordering", "FAIL",
                        f"strictness violated at {db} dB: new-orig={gap:.3e}, C-new={cgap:.3e}")
            worst_gap = min(worst_gap, gap)
    return ("fig3 ordering", "PASS",
            f"C >= new >= orig on -10..30 dB; min strict new-orig gap below 20 dB = {worst_gap:.3e} bits")


def _check_monotonicity() -> Check:
    grid = [10.0 ** (db / 10.0) for db in range(-10, 31)]
    curves = {"c_awgn": awgn_capacity, "bound_new": bound_new,
              "bound_original": bound_original, "asymptote": asymptote}
    for name, fn in curves.items():
        vals = [fn(s) for s in grid]
        diffs = np.diff(vals)
        if not np.all(diffs > 0):
            return ("monotonicity", "FAIL", f"{name} is not strictly increasing")
    return ("monotonicity", "PASS", "all four rate curves strictly increasing on -10..30 dB")


def _check_spot_values() -> Check:
    bn, bo = bound_new(1.0), bound_original(1.0)
    ref_bn, ref_bo = 0.2557044557561508, 0.2453856651799370
    via_entropy = bound_new_from_entropy(1.0, t=1.0)
    if abs(bn - ref_bn) > 1e-9 or abs(bo - ref_bo) > 1e-9:
        return ("0 dB spot values", "FAIL",
                f"bound_new(1)={bn!r}, bound_original(1)={bo!r}")
    if abs(bn - via_entropy) > 1e-10:
        return ("0 dB spot values", "FAIL",
                f"entropy route disagrees: {bn!r} vs {via_entropy!r}")
    return ("0 dB spot values", "PASS",
            f"bound_new(0 dB)={bn:.6f}, bound_original(0 dB)={bo:.6f} (entropy route agrees)")


def _check_asymptote() -> Check:
    snr = 1e6
    d_new = abs(bound_new(snr) - asymptote(snr))
    d_orig = abs(bound_original(snr) - asymptote(snr))
    ok = d_new < 0.01 and d_orig < 0.01
    return ("asymptote convergence", "PASS" if ok else "FAIL",
            f"at 60 dB: |new-asym|={d_new:.2e}, |orig-asym|={d_orig:.2e} (tol 0.01)")


def _check_shaping_loss() -> Check:
    snr = 1e6
    vertical = awgn_capacity(snr) - bound_new(snr)
    target_v, target_h = shaping_loss_bits(), shaping_loss_db()
    # horizontal gap: extra dB the bound needs to reach capacity at 60 dB
    c_ref = awgn_capacity(snr)
    lo, hi = 0.0, 4.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bound_new(10.0 ** ((60.0 + mid) / 10.0)) < c_ref:
            lo = mid
        else:
            hi = mid
    horizontal = 0.5 * (lo + hi)
    ok = abs(vertical - target_v) < 0.005 and abs(horizontal - target_h) < 0.005
    return ("shaping loss", "PASS" if ok else "FAIL",
            f"vertical={vertical:.4f} bits (ref {target_v:.4f}), "
            f"horizontal={horizontal:.4f} dB (ref {target_h:.4f})")


def _check_inequality_chain() -> Check:
    worst = math.inf
    for db in _SNRP_GRID_DB:
        sp = 10.0 ** (db / 10.0)
        s = _scale_for(sp)
        hw = wrapped_entropy(WrappedGaussian(scale=s, period=1.0)).bits
        tg = TruncatedGaussian(scale=s, half_width=0.5)
        hq = truncated_entropy_quadrature(tg).bits
        hc = truncated_entropy_closed_form(tg).bits
        if hw > hc + 1e-6:
            return ("inequality chain", "FAIL",
                    f"wrapped exceeds closed form at SNR'={db} dB: {hw:.9f} > {hc:.9f}")
        if hq > hc + 1e-6:
            return ("inequality chain", "FAIL",
                    f"quadrature exceeds closed form at SNR'={db} dB: {hq:.9f} > {hc:.9f}")
        for t in (0.1, 1.0, 7.3):
            direct = bound_new(sp)
            via = bound_new_from_entropy(sp, t=t)
            if abs(direct - via) > 1e-10:
                return ("inequality chain", "FAIL",
                        f"scale-freedom broken at SNR'={db} dB, t={t}: {direct!r} vs {via!r}")
        worst = min(worst, hc - hw)
    return ("inequality chain", "PASS",
            f"wrapped <= truncated quadrature <= closed form holds on the outer links "
            f"for SNR' in -20..60 dB; min closed-minus-wrapped margin = {worst:.3e} bits")


def _check_rate_sandwich() -> Check:
    worst = math.inf
    for db in range(-10, 31):
        sp = 10.0 ** (db / 10.0)
        ex = -wrapped_entropy(WrappedGaussian(scale=_scale_for(sp), period=1.0)).bits
        bn, bo = bound_new(sp), bound_original(sp)
        if bound_gap_new_vs_original(sp) < 0 or bn > ex + 1e-6:
            return ("rate sandwich", "FAIL",
                    f"ordering broken at SNR'={db} dB: orig={bo:.6f} new={bn:.6f} exact={ex:.6f}")
        worst = min(worst, ex - bn)
    return ("rate sandwich", "PASS",
            f"orig <= new <= exact mod-t rate on -10..30 dB; min exact-new margin = {worst:.2e} bits")


def _check_lq(seed: int) -> Check:
    m = Modulus(1.0)
    worst = 0.0
    for i in range(100):
        rng = RngStream(seed, 9000 + i)
        h = gen_channel(4, 4, rng)
        pset = synthesize_zf(h)
        e1 = np.linalg.norm(pset.l @ pset.q - h)
        e2 = np.linalg.norm(pset.q @ pset.q.T - np.eye(4))
        e3 = np.linalg.norm(pset.g @ h @ pset.f - pset.b)
        w = rng.uniform(-m.half, m.half, 4)
        x, _ = thp_encode(w, pset, m)
        z = receiver_decode(h @ x, pset, alpha=1.0, m=m)
        e4 = float(np.max(np.abs(z - w)))
        if e1 > 1e-10 or e2 > 1e-10 or e3 > 1e-10:
            return ("lq reconstruction", "FAIL",
                    f"draw {i}: |LQ-H|={e1:.2e} |QQt-I|={e2:.2e} |GHF-B|={e3:.2e}")
        if e4 > 1e-9:
            return ("lq reconstruction", "FAIL",
                    f"draw {i}: noiseless end-to-end error {e4:.2e}")
        worst = max(worst, e1, e2, e3, e4)
    return ("lq reconstruction", "PASS",
            f"100 seeded 4x4 channels: max factorization/chain error = {worst:.2e}")


def _check_crypto_lemma(seed: int) -> Check:
    m = Modulus(1.0)
    n = 1_000_000
    alpha = 0.7071
    rng = RngStream(seed, 100)
    draws = {
        "constant": np.full(n, 0.37),
        "uniform_wide": rng.uniform(-5.0, 5.0, n),
        "gaussian": rng.normals(n, 3.0),
    }
    pvals = {}
    for name, s in draws.items():
        w = rng.uniform(-m.half, m.half, n)
        x = mod_t(w - alpha * s, m)
        counts, _ = np.histogram(x, bins=64, range=(-m.half, m.half))
        p = stats.chisquare(counts).pvalue
        pvals[name] = p
        if p <= 1e-3:
            return ("crypto lemma", "FAIL",
                    f"uniformity rejected for {name} interference (p={p:.2e})")
    detail = ", ".join(f"{k}: p={v:.3f}" for k, v in pvals.items())
    return ("crypto lemma", "PASS", f"encoder output uniform under chi-square ({detail})")


def _check_encoder_uniform_multiuser(seed: int) -> Check:
    m = Modulus(1.0)
    rng = RngStream(seed, 200)
    h = gen_channel(4, 4, rng)
    pset = synthesize_zf(h)
    w = rng.uniform(-m.half, m.half, (4, 250_000))
    _, v = thp_encode(w, pset, m)
    for i in range(4):
        counts, _ = np.histogram(v[i], bins=64, range=(-m.half, m.half))
        p = stats.chisquare(counts).pvalue
        if p <= 1e-3:
            return ("encoder uniformity", "FAIL", f"user {i} rejected (p={p:.2e})")
    return ("encoder uniformity", "PASS",
            "per-user encoder outputs uniform under chi-square (4 users x 250k uses)")


def _check_definition1(seed: int) -> Check:
    m = Modulus(1.0)
    n = 1_000_000
    pvals = []
    for j, ratio in enumerate((0.05, 0.289, 1.0)):
        rng = RngStream(seed, 300 + j)
        w = rng.uniform(-m.half, m.half, n)
        s = rng.uniform(-5.0, 5.0, n)
        z1 = dpc_chain(w, s, alpha=1.0, sigma=ratio, m=m, rng=rng)
        w2 = rng.uniform(-m.half, m.half, n)
        z2 = mod_t_channel(w2, alpha=1.0, sigma=ratio, m=m, rng=rng)
        p = stats.ks_2samp(z1, z2, method="asymp").pvalue
        pvals.append(p)
        if p <= 1e-3:
            return ("definition-1 equivalence", "FAIL",
                    f"KS rejects at sigma/t={ratio} (p={p:.2e})")
    detail = ", ".join(f"sigma/t={r}: p={p:.3f}" for r, p in zip((0.05, 0.289, 1.0), pvals))
    return ("definition-1 equivalence", "PASS", detail)


def _check_mc_oracle(seed: int) -> Check:
    m = Modulus(1.0)
    noise = NoiseModel.from_snr(1.0, p_total=m.p_t)
    sigma = math.sqrt(noise.sigma2)
    exact = exact_modt_rate(noise.alpha, sigma, m).bits
    est = mc_mutual_info(noise.alpha, sigma, m, samples=1_000_000, bins=256,
                         rng=RngStream(seed, 400))
    d = abs(est.bits - exact)
    dz = abs(est.h_output - math.log2(m.t))
    ok = d < 0.02 and dz < 0.01
    return ("mc estimator oracle", "PASS" if ok else "FAIL",
            f"|mc-exact|={d:.4f} bits (tol 0.02), |h(z)-log2 t|={dz:.4f} (tol 0.01)")


def _check_reachability_cap() -> Check:
    for db in _SNRP_GRID_DB:
        sp = 10.0 ** (db / 10.0)
        nm = NoiseModel.from_snr(sp, p_total=1.0 / 12.0)
        ratio = (nm.alpha ** 2) * nm.sigma2 * 12.0
        if ratio > 1.0 + 1e-12:
            return ("reachability cap", "FAIL",
                    f"(alpha sigma)^2 * 12/t^2 = {ratio} > 1 at SNR'={db} dB")
    return ("reachability cap", "PASS",
            "(alpha sigma)^2 <= t^2/12 for all SNR' >= -20 dB")


def _report_eq16_middle_link() -> Check:
    worst, where = -math.inf, None
    for db in _SNRP_GRID_DB:
        sp = 10.0 ** (db / 10.0)
        s = _scale_for(sp)
        hw = wrapped_entropy(WrappedGaussian(scale=s, period=1.0)).bits
        hq = truncated_entropy_quadrature(TruncatedGaussian(scale=s, half_width=0.5)).bits
        if hw - hq > worst:
            worst, where = hw - hq, db
    return ("middle link wrapped<=truncated", "REPORT",
            f"max(wrapped - truncated) = {worst:+.3e} bits at SNR'={where} dB; "
            "positive values mean the intermediate inequality fails there while "
            "the final bound still holds (see rate sandwich)")


def _report_self_noise(seed: int) -> Check:
    m = Modulus(1.0)
    n = 500_000
    rng = RngStream(seed, 500)
    w = rng.uniform(-m.half, m.half, n)
    s = rng.uniform(-5.0, 5.0, n)
    z1 = dpc_chain(w, s, alpha=0.7071, sigma=0.289, m=m, rng=rng)
    w2 = rng.uniform(-m.half, m.half, n)
    z2 = mod_t_channel(w2, alpha=0.7071, sigma=0.289, m=m, rng=rng)
    res = stats.ks_2samp(z1, z2, method="asymp")
    return ("self-noise below alpha=1", "REPORT",
            f"KS(dpc chain, mod-t channel) at alpha=0.707: stat={res.statistic:.4f}, "
            f"p={res.pvalue:.2e} (chains differ by the (alpha-1)x term)")


def _report_residual_normality(seed: int) -> Check:
    m = Modulus(1.0)
    noise = NoiseModel.from_snr(10.0, p_total=m.p_t)
    rng = RngStream(seed, 600)
    h = gen_channel(4, 4, rng)
    sim = per_user_rate_sim(h, noise, m, samples=50_000, rng=rng.derive(1), kind="mmse")
    pset = sim.pset
    w = rng.uniform(-m.half, m.half, (4, 200_000))
    _, v = thp_encode(w, pset, m)
    resid = (pset.residual() @ v).ravel()
    p = stats.normaltest(resid).pvalue
    kurt = float(stats.kurtosis(resid))
    return ("residual interference normality", "REPORT",
            f"normaltest p={p:.2e}, excess kurtosis={kurt:+.3f} on 800k pooled samples "
            "(Gaussianity is a modeling assumption, reported not asserted)")


def _report_low_snr_margin() -> Check:
    worst, where = math.inf, None
    for db in range(-20, -10):
        sp = 10.0 ** (db / 10.0)
        ex = -wrapped_entropy(WrappedGaussian(scale=_scale_for(sp), period=1.0)).bits
        margin = ex - bound_new(sp)
        if margin < worst:
            worst, where = margin, db
    return ("bound validity below -10 dB", "REPORT",
            f"min(exact - bound_new) = {worst:+.4f} bits at SNR'={where} dB")


def _report_gain_sensitivity(seed: int) -> Check:
    m = Modulus(1.0)
    noise = NoiseModel.from_snr(10.0, p_total=m.p_t)
    rng = RngStream(seed, 700)
    h = gen_channel(4, 4, rng)
    sim = per_user_rate_sim(h, noise, m, samples=50_000, rng=rng.derive(1), kind="mmse")
    per_user = ", ".join(f"{10 * math.log10(s):+.2f}" for s in sim.snr_prime_per_user)
    return ("receiver gain sensitivity", "REPORT",
            f"per-user effective SNR' [{per_user}] dB vs pooled "
            f"{10 * math.log10(sim.snr_prime):+.2f} dB at 10 dB system SNR "
            "(gains from the augmented factorization diagonal)")


def run_verification(seed: int = 1) -> Tuple[str, bool]:
    """Run all checks; returns (report text, all asserted checks passed)."""
    checks: List[Check] = [
        _check_fig3_ordering(),
        _check_monotonicity(),
        _check_spot_values(),
        _check_asymptote(),
        _check_shaping_loss(),
        _check_inequality_chain(),
        _check_rate_sandwich(),
        _check_reachability_cap(),
        _check_lq(seed),
        _check_crypto_lemma(seed),
        _check_encoder_uniform_multiuser(seed),
        _check_definition1(seed),
        _check_mc_oracle(seed),
        _report_eq16_middle_link(),
        _report_self_noise(seed),
        _report_residual_normality(seed),
        _report_low_snr_margin(),
        _report_gain_sensitivity(seed),
    ]
    width = max(len(name) for name, _, _ in checks)
    lines = [f"thprates verification (seed={seed})", "-" * 72]
    ok = True
    for name, status, detail in checks:
        lines.append(f"{name:<{width}}  {status:<6}  {detail}")
        if status == "FAIL":
            ok = False
    n_assert = sum(1 for _, s, _ in checks if s in ("PASS", "FAIL"))
    n_pass = sum(1 for _, s, _ in checks if s == "PASS")
    lines.append("-" * 72)
    lines.append(f"{n_pass}/{n_assert} asserted checks passed; "
                 f"{len(checks) - n_assert} report-only entries")
    return "\n".join(lines), ok
