"""Command-line entry point: run sweeps, summarize results, self-check."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .experiment import (parse_config, run_experiment, summarize, summary_to_csv,
                         write_results)


def _cmd_run(args) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        config_text = handle.read()
    config = parse_config(config_text)
    if args.trials is not None:
        config.trials = args.trials
    if args.seed is not None:
        config.master_seed = args.seed
    config.validate()
    output = args.output or config.output_path
    rows = run_experiment(config, workers=args.workers)
    manifest_path = write_results(rows, config, output, config_text)
    print(f"wrote {len(rows)} rows to {output}")
    print(f"manifest: {manifest_path}")
    return 0


def _cmd_summarize(args) -> int:
    with open(args.input, "r", encoding="utf-8") as handle:
        rows = summarize(handle.read())
    text = summary_to_csv(rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        print(f"wrote {len(rows)} summary rows to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _selftest_checks():
    """Fast subset of the property suite; yields (name, callable)."""
    from .channel import ArrayGeometry, LinkStatistics, sample_channels
    from .codebook import dft_codebook, dft_matrix
    from .precoding import waterfill
    from .rng import SeedPath
    from .schemes import SchemeSpec, TrialEnv, run_scheme
    from .training import collect_observations, estimate_stacked, orthogonal_pilot, stack_channels
    from .weights import WeightProblem, block_gram, optimize_weights, stream_basis

    def dft_orthogonality():
        for size in (4, 9, 26):
            a = dft_matrix(size)
            err = np.max(np.abs(a.conj().T @ a - size * np.eye(size)))
            assert err <= 1e-9, f"DFT gram error {err:.2e} at size {size}"

    def stacked_identity():
        rng = np.random.default_rng(7)
        geo = ArrayGeometry(n_x=3, n_y=2, m_t=3, m_r=2)
        stats = LinkStatistics(rician_factor=2.0, path_loss_exponent=2.0)
        real = sample_channels(geo, stats, stats, stats, rng)
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, geo.n_elements))
        direct = real.h_d + (real.h_r * phi) @ real.h_t
        assert np.allclose(stack_channels(real).composite(phi), direct, atol=1e-12)

    def noiseless_estimate_exact():
        rng = np.random.default_rng(11)
        geo = ArrayGeometry()
        stats = LinkStatistics(rician_factor=2.0, path_loss_exponent=2.4)
        real = sample_channels(geo, stats, stats, stats, rng)
        truth = stack_channels(real)
        pilot = orthogonal_pilot(geo.m_r, geo.m_r, 1.0)
        book = dft_codebook(geo.n_elements, geo.n_elements + 1)
        obs = collect_observations(real, book, pilot, 0.0, lambda i: None)
        est = estimate_stacked(obs)
        rel = np.linalg.norm(est.matrix - truth.matrix) / np.linalg.norm(truth.matrix)
        assert rel <= 1e-9, f"noiseless estimate relative error {rel:.2e}"

    def kkt_monotone():
        rng = np.random.default_rng(3)
        for _ in range(5):
            n, m_t, m_s = 8, 2, 2
            mat = rng.standard_normal(((n + 1) * m_t, m_s)) + \
                1j * rng.standard_normal(((n + 1) * m_t, m_s))
            gram = block_gram(mat, m_t)
            a = dft_matrix(n + 1)
            k0 = np.zeros(n + 1, dtype=complex)
            k0[0] = 1.0
            sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
            diffs = np.diff(sol.objective_trace)
            assert np.all(diffs >= -1e-9 * np.maximum(1.0, sol.objective_trace[:-1])), \
                "objective trace decreased"
            assert np.max(np.abs(np.abs(a @ sol.k) - 1.0)) <= 1e-6

    def waterfill_slackness():
        rng = np.random.default_rng(5)
        for _ in range(20):
            sv = np.sort(rng.uniform(0.05, 3.0, 4))[::-1]
            p, eta = waterfill(sv, 2.0, 0.5)
            assert abs(p.sum() - 2.0) <= 1e-9
            for pi, s in zip(p, sv):
                if pi > 0:
                    assert abs(1.0 / eta - 0.5 / s**2 - pi) <= 1e-9
                else:
                    assert 1.0 / eta <= 0.5 / s**2 + 1e-9

    def scheme_reproducible():
        geo = ArrayGeometry(n_x=4, n_y=2, m_t=2, m_r=2)
        stats = LinkStatistics(rician_factor=2.0, path_loss_exponent=2.4)
        caps = []
        for _ in range(2):
            real = sample_channels(geo, stats, stats, stats,
                                   SeedPath(9, "channel", 0).generator())
            env = TrialEnv(pilot=orthogonal_pilot(2, 2, 1.0), bs_noise_power=1e-12,
                           ue_noise_power=1e-11, p_d=1.0, n_streams=2,
                           p_d_dbm=30.0, p_u_dbm=30.0, trial=0, seed=9)
            rec = run_scheme(real, SchemeSpec(kind="wdft", q=5), env,
                             SeedPath(9, "scheme", 0))
            caps.append(rec.capacity)
        assert caps[0] == caps[1], "repeated trial differed"

    return [
        ("dft-orthogonality", dft_orthogonality),
        ("stacked-channel-identity", stacked_identity),
        ("noiseless-estimate-exact", noiseless_estimate_exact),
        ("kkt-monotone-feasible", kkt_monotone),
        ("waterfill-slackness", waterfill_slackness),
        ("scheme-reproducible", scheme_reproducible),
    ]


def _cmd_selftest(_args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except AssertionError as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    if failures:
        print(f"{failures} selftest check(s) failed")
        return 1
    print("all selftest checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rismimo",
        description="Monte Carlo capacity benchmarks for RIS-assisted MIMO "
                    "with weighted DFT-codebook reflection design.")
    parser.add_argument("--version", action="version", version=f"rismimo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a sweep from a YAML config")
    run.add_argument("--config", required=True, help="path to the experiment config")
    run.add_argument("--output", default=None, help="CSV output path (overrides config)")
    run.add_argument("--trials", type=int, default=None, help="override trial count")
    run.add_argument("--seed", type=int, default=None, help="override master seed")
    run.add_argument("--workers", type=int, default=None,
                     help="worker processes (default: $RISMIMO_WORKERS or 1)")
    run.set_defaults(func=_cmd_run)

    summ = sub.add_parser("summarize", help="per-scheme mean/SE table from a results CSV")
    summ.add_argument("--input", required=True, help="results CSV path")
    summ.add_argument("--output", default=None, help="summary CSV path (default: stdout)")
    summ.set_defaults(func=_cmd_summarize)

    self_test = sub.add_parser("selftest", help="run the fast property-check subset")
    self_test.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
