"""Acceptance suite: each test enforces one acceptance criterion at its
stated tolerance and prints a PASS line (visible with pytest -s).

Identity-style criteria run both computation pipelines, the closed-form
Gaussian calculus and the FFT grid engine, against each other.
"""

import time
import warnings

import numpy as np
import pytest

from mtfr.certify import (
    alt1_tfr_tensor,
    alt2_certificate,
    certify,
    classify,
    counterexample_alt1,
    pair_to_partial,
    verify_identity,
    verify_pair_identity,
)
from mtfr.checks import (
    Ball,
    Box,
    LinearImage,
    beurling_sweep,
    complement_integral,
    hardy_fit_field,
    mean_width,
)
from mtfr.errors import ChirpAliasingWarning
from mtfr.gaussian import (
    apply_dilation,
    apply_partial_fourier,
    apply_word,
    conjugate,
    log_modulus,
    partial_stft_point,
    random_gaussian,
    standard_gaussian,
    tensor,
)
from mtfr.grid import (
    apply_word_grid,
    mass_outside,
    partial_stft_at,
    partial_stft_slice,
    sample,
    sample_function,
)
from mtfr.symplectic import (
    GeneratorWord,
    free_factorize,
    make_chirp,
    make_dilation,
    make_rotation,
    pre_iwasawa,
    random_symplectic,
    select_tau_balanced,
)

from conftest import haar_orthogonal, haar_unitary, random_spd


def _report(number, text):
    print(f"\nACCEPTANCE {number}: PASS - {text}")


def _random_bold(d, rng, word_seed):
    base = random_symplectic(2 * d, 4, seed=word_seed)
    return base @ make_rotation(haar_unitary(2 * d, rng))


def test_acceptance_01_pre_iwasawa_round_trip():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 4):
        for seed in range(1000):
            m = random_symplectic(n, 8, seed=10_000 * n + seed)
            pi = pre_iwasawa(m)
            err = np.linalg.norm(pi.reconstruct() - m.entries) / np.linalg.norm(
                m.entries
            )
            worst = max(worst, err)
            assert err <= 1e-10
            np.testing.assert_allclose(pi.l, pi.l.T, atol=1e-12)
            assert np.linalg.eigvalsh(pi.l)[0] > 0.0
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(1, f"3000 round trips, worst rel error {worst:.2e}, {elapsed:.1f}s")


def test_acceptance_02_generator_word_factorization():
    from mtfr.symplectic import factor_to_word

    worst_recon, worst_asym = 0.0, 0.0
    count = 0
    for n in (1, 2, 3, 4):
        for seed in range(125):
            m = random_symplectic(n, 6, seed=777 * n + seed)
            word = factor_to_word(m)
            recon = np.linalg.norm(word.matrix() - m.entries)
            worst_recon = max(worst_recon, recon)
            assert recon <= 1e-9
            # raw symmetry of the free-decomposition chirp blocks
            u = pre_iwasawa(m).u
            if np.linalg.norm(u.imag) > 1e-12:
                tau = select_tau_balanced(u)
                a, b = (tau * u).real, (tau * u).imag
                left = a @ np.linalg.inv(b)
                right = np.linalg.solve(b, a)
                asym = max(
                    np.linalg.norm(left - left.T), np.linalg.norm(right - right.T)
                )
                worst_asym = max(worst_asym, asym)
                assert asym <= 1e-10
            count += 1
    assert count == 500
    _report(
        2,
        f"500 words, worst reconstruction {worst_recon:.2e}, "
        f"worst chirp asymmetry {worst_asym:.2e}",
    )


def test_acceptance_03_odo_svd_and_takagi(rng):
    from mtfr.unitary import odo_svd, takagi_symmetric_unitary

    worst_recon, worst_orth, worst_takagi = 0.0, 0.0, 0.0
    for trial in range(500):
        n = 2 + trial % 7  # sizes 2..8
        u = haar_unitary(n, rng)
        fact = odo_svd(u)
        recon = np.linalg.norm(fact.reconstruct() - u)
        orth = max(
            np.linalg.norm(fact.w1.T @ fact.w1 - np.eye(n)),
            np.linalg.norm(fact.w2.T @ fact.w2 - np.eye(n)),
        )
        worst_recon = max(worst_recon, recon)
        worst_orth = max(worst_orth, orth)
        assert recon <= 1e-9 and orth <= 1e-10
        if trial % 5 == 0:
            s = u.T @ u
            v = takagi_symmetric_unitary(s)
            worst_takagi = max(worst_takagi, np.linalg.norm(v.T @ v - s))
            assert worst_takagi <= 1e-9
    _report(
        3,
        f"500 unitaries n<=8: recon {worst_recon:.2e}, orthogonality "
        f"{worst_orth:.2e}, takagi {worst_takagi:.2e}",
    )


def test_acceptance_04_central_identity(rng):
    t0 = time.perf_counter()
    worst = 0.0
    done = {1: 0, 2: 0}
    targets = {1: 200, 2: 50}
    seed = 0
    while done[1] < targets[1] or done[2] < targets[2]:
        d = 1 if done[1] < targets[1] else 2
        seed += 1
        bold = _random_bold(d, rng, word_seed=seed)
        if classify(bold)[0] != "II":
            continue
        cert = alt2_certificate(bold)
        f, g = random_gaussian(d, rng), random_gaussian(d, rng)
        pts = rng.uniform(-3.0, 3.0, size=(100, 2 * d))
        err = verify_identity(cert, f, g, pts)
        worst = max(worst, err)
        assert err <= 1e-8, f"identity error {err:.2e} at seed {seed}"
        done[d] += 1

    # grid cross-check of one d = 1 instance: the right side is assembled
    # entirely on the grid, the left side by the closed-form oracle
    u = (1.0 / np.sqrt(2.0)) * np.array([[1.0, 1j], [1j, 1.0]])
    bold = make_rotation(u)
    cert = alt2_certificate(bold)
    a2 = cert.alt2
    fg, gg = random_gaussian(1, rng), random_gaussian(1, rng)
    npts, extent = 256, 16.0
    ffield = sample(fg, (npts,), (extent,))
    gfield = sample(gg, (npts,), (extent,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ChirpAliasingWarning)
        af = apply_word_grid(ffield, a2.word_a)
        bg = apply_word_grid(gfield, a2.word_b)
    v = partial_stft_slice(af, bg, 1)
    sign, logdet = np.linalg.slogdet(a2.omega)
    big = apply_word(tensor(fg, conjugate(gg)), cert.word_bold)
    grid_errs = []
    for i in range(npts // 2 - 32, npts // 2 + 32, 5):
        for j in range(npts // 2 - 32, npts // 2 + 32, 5):
            mu = np.array([v.coords(0)[i], v.coords(1)[j]])
            lam = a2.omega @ mu
            lhs = np.exp(log_modulus(big, lam))
            rhs = abs(v.values[i, j]) * np.exp(-0.5 * logdet)
            if lhs > 1e-7:
                grid_errs.append(abs(lhs - rhs) / lhs)
    grid_err = max(grid_errs)
    assert grid_err <= 1e-5
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(
        4,
        f"250 certificates: oracle identity worst {worst:.2e}, grid "
        f"cross-check {grid_err:.2e}, {elapsed:.1f}s",
    )


def test_acceptance_05_pair_identity(rng):
    worst = 0.0
    checked = 0
    trial = 0
    while checked < 200:
        d = 1 + trial % 3
        trial += 1
        v = haar_unitary(d, rng)
        if np.linalg.norm(v.imag) < 1e-6:
            continue
        cert = pair_to_partial(v)
        f = random_gaussian(d, rng)
        pts = rng.uniform(-2.5, 2.5, size=(50, 2 * d))
        err = verify_pair_identity(cert, f, pts)
        worst = max(worst, err)
        assert err <= 1e-8
        checked += 1
    _report(5, f"{checked} pair identities (d<=3), worst error {worst:.2e}")


def test_acceptance_06_alt1_counterexample(rng):
    box = ([-2.0, -2.0], [2.0, 2.0])
    worst = 0.0

    def run(bold):
        cert = certify(bold)
        assert cert.alternative == "I"
        cx = counterexample_alt1(cert, bump_box=(-2.0, 2.0), points=256, extent=16.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ChirpAliasingWarning)
            t0 = alt1_tfr_tensor(cx)
        return mass_outside(t0, box)

    worst = max(worst, run(make_rotation(1j * np.eye(2))))
    for trial in range(20):
        th = rng.uniform(np.pi / 4, 3 * np.pi / 4, size=2)
        w = haar_orthogonal(2, rng)
        u = w @ np.diag(np.exp(1j * th))
        worst = max(worst, run(make_rotation(u)))
    assert worst <= 1e-6
    _report(6, f"21 compact-support counterexamples, worst mass {worst:.2e}")


def test_acceptance_07_hardy_critical_case():
    phi = sample(standard_gaussian(1), (256,), (16.0,))
    v = partial_stft_slice(phi, phi, 1)
    fit = hardy_fit_field(v, rmin=1.5, rmax=4.0)
    assert abs(fit.alpha - 1.0) <= 1e-3
    assert abs(fit.n_hat) <= 0.05

    h1 = sample_function(
        lambda m: m[..., 0] * np.exp(-np.pi * m[..., 0] ** 2), (256,), (16.0,)
    )
    vh = partial_stft_slice(h1, phi, 1)
    fit_h = hardy_fit_field(vh, rmin=1.5, rmax=4.0)
    assert abs(fit_h.alpha - 1.0) <= 1e-2
    assert abs(fit_h.n_hat - 1.0) <= 0.2
    _report(
        7,
        f"V(phi,phi): alpha {fit.alpha:.5f}, N {fit.n_hat:.4f}; Hermite: "
        f"alpha {fit_h.alpha:.4f}, N {fit_h.n_hat:.4f}",
    )


def test_acceptance_08_beurling_divergence_signature():
    phi = standard_gaussian(1)
    antidiag = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]])

    def ev(pts):
        return partial_stft_point(phi, phi, 1, pts[:, :1], pts[:, 1:])

    rep = beurling_sweep(ev, antidiag, 0.0, (2, 3, 4, 6, 8), resolution=600)
    values = dict(rep.sweep)
    doubling = []
    for r in (2.0, 3.0, 4.0):
        rep_r = beurling_sweep(ev, antidiag, 0.0, (r, 2 * r), resolution=600)
        ratio = rep_r.sweep[1][1] / rep_r.sweep[0][1]
        doubling.append(ratio)
        assert ratio >= 1.5
    assert rep.verdict == "divergent-looking"

    sup = lambda pts: np.exp(-2.0 * np.pi * np.einsum("ij,ij->i", pts, pts))
    rep2 = beurling_sweep(sup, antidiag, 0.0, (2, 3, 4, 6, 8), resolution=600)
    assert rep2.verdict == "convergent-looking"
    assert rep2.ratios[-1] <= 1.05
    _report(
        8,
        f"doubling ratios {[f'{x:.2f}' for x in doubling]} >= 1.5; "
        f"supercritical ratio {rep2.ratios[-1]:.4f} <= 1.05",
    )


def test_acceptance_09_classifier_invariance(rng):
    flips = 0
    total = 0
    for trial in range(10):
        d = 1 + trial % 2
        bold = _random_bold(d, rng, word_seed=900 + trial)
        verdict, _ = classify(bold)
        for _ in range(10):
            q = random_spd(2 * d, rng) - np.eye(2 * d)
            q = 0.5 * (q + q.T)
            l = random_spd(2 * d, rng)
            left = make_chirp(q) @ make_dilation(l) @ bold
            total += 1
            if classify(left)[0] != verdict:
                flips += 1
    assert flips == 0 and total == 100
    _report(9, f"verdict stable under {total} chirp/dilation left-multiplications")


def test_acceptance_10_grid_vs_oracle_partial_stft(rng):
    npts, extent = 256, 16.0
    worst = 0.0

    # d = 1, k = 1: full STFT plane
    fg, gg = random_gaussian(1, rng), random_gaussian(1, rng)
    f = sample(fg, (npts,), (extent,))
    g = sample(gg, (npts,), (extent,))
    v = partial_stft_slice(f, g, 1)
    for _ in range(100):
        i = int(rng.integers(npts // 2 - 32, npts // 2 + 32))
        j = int(rng.integers(npts // 2 - 32, npts // 2 + 32))
        want = partial_stft_point(
            fg, gg, 1, [v.coords(0)[i]], [v.coords(1)[j]]
        )[()]
        if want > 1e-8:
            worst = max(worst, abs(abs(v.values[i, j]) - want) / want)

    # d = 2, k = 1: cross-sections; d = 2, k = 2: direct points
    fg2, gg2 = random_gaussian(2, rng), random_gaussian(2, rng)
    f2 = sample(fg2, (npts, npts), (extent, extent))
    g2 = sample(gg2, (npts, npts), (extent, extent))
    for _ in range(25):
        x2i = int(rng.integers(npts // 2 - 16, npts // 2 + 16))
        w2i = int(rng.integers(npts // 2 - 16, npts // 2 + 16))
        sl = partial_stft_slice(f2, g2, 1, (x2i,), (w2i,))
        x1i = int(rng.integers(npts // 2 - 24, npts // 2 + 24))
        w1i = int(rng.integers(npts // 2 - 24, npts // 2 + 24))
        x = np.array([sl.coords(0)[x1i], f2.coords(1)[x2i]])
        om = np.array([sl.coords(1)[w1i], g2.coords(1)[w2i]])
        want = partial_stft_point(fg2, gg2, 1, x, om)[()]
        if want > 1e-8:
            worst = max(worst, abs(abs(sl.values[x1i, w1i]) - want) / want)
    for _ in range(25):
        x1i = tuple(int(a) for a in rng.integers(npts // 2 - 20, npts // 2 + 20, 2))
        w1 = rng.uniform(-1.5, 1.5, size=2)
        got = abs(partial_stft_at(f2, g2, 2, x1i, (), w1, ()))
        x = np.array([f2.coords(0)[x1i[0]], f2.coords(1)[x1i[1]]])
        want = partial_stft_point(fg2, gg2, 2, x, w1)[()]
        if want > 1e-8:
            worst = max(worst, abs(got - want) / want)
    assert worst <= 1e-6
    _report(10, f"grid/oracle partial STFT agreement, worst rel error {worst:.2e}")


def test_acceptance_11_nazarov_arithmetic(rng):
    # ball mean width is exact
    width, err = mean_width(Ball((0.0, 0.0, 0.0), 1.7))
    assert width == 2.0 * 1.7 and err == 0.0

    # complement integrals before/after the L coordinate change
    g = standard_gaussian(1)
    l = np.array([[1.7]])
    dg = apply_dilation(g, l)
    box = Box((0.0,), (2.0,))
    before_l = complement_integral(sample(dg, (4096,), (64.0,)), box)
    after_l = complement_integral(
        sample(g, (4096,), (64.0,)), LinearImage(box, np.linalg.inv(l))
    )
    err_l = abs(before_l - after_l)
    assert err_l <= 1e-6

    # ... and the Im(Sigma) change on the Fourier side of the pair split
    s = 0.6
    fg = apply_partial_fourier(g, (0,))
    dsfg = apply_dilation(fg, np.array([[s]]))
    t_box = Box((0.0,), (1.5,))
    before_s = complement_integral(sample(dsfg, (4096,), (64.0,)), t_box)
    after_s = complement_integral(
        sample(fg, (4096,), (64.0,)), LinearImage(t_box, np.array([[1.0 / s]]))
    )
    err_s = abs(before_s - after_s)
    assert err_s <= 1e-6

    # volume arithmetic for diagonal maps is exact
    from mtfr.checks import volume

    b2 = Box((0.0, 0.0), (2.0, 1.0))
    lm = np.diag([2.0, 5.0])
    assert volume(LinearImage(b2, np.linalg.inv(lm))) == pytest.approx(
        volume(b2) / 10.0
    )
    _report(
        11,
        f"ball width exact; complement change-of-variables errors "
        f"{err_l:.2e} (L) and {err_s:.2e} (Im Sigma)",
    )
