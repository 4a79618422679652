"""End-to-end schemes: training, RC selection or optimization, precoding, evaluation.

Every runner designs the reflection vector and precoder from estimated
channels only, then reports the capacity achieved on the true realization.
Randomness comes exclusively from the SeedPath tree handed in, so a trial is
reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .codebook import Codebook, dft_codebook, environment_aware_order, random_codebook
from .precoding import CapacityRecord, capacity, effective_channel, svd_precoder
from .rng import SeedPath
from .training import (collect_observations, estimate_composite, estimate_stacked,
                       stack_channels)
from .weights import (WeightProblem, block_gram, compose_reflection, initial_weights,
                      optimize_weights, stream_basis)

__all__ = ["SchemeSpec", "TrialEnv", "run_random_phase", "run_codeword_selection",
           "run_weighted_dft", "run_scheme", "SCHEME_LABELS"]

SCHEME_LABELS = {
    "random": "Random",
    "ranc": "RanC",
    "dftc": "DFTC",
    "wdft": "WDFT",
    "ewdft": "EWDFT",
}


@dataclass
class SchemeSpec:
    """What to run: scheme kind, training overhead, and optimizer settings."""

    kind: str
    q: int = 6
    ordering: str = "sequential"          # sequential | environment
    tolerance: float = 1e-8
    max_iterations: int = 100
    restarts: int = 4                     # weight-iteration starts, best codewords first
    polish_draws: int = 24                # perturbed weight candidates per restart
    polish_scale: float = 0.3             # phase perturbation std-dev (radians)
    ref_antenna_tx: int = 0               # antenna pair for the LoS-alignment order
    ref_antenna_rx: int = 0
    genie_precoder: bool = False          # random scheme only: design W on the true channel

    def __post_init__(self):
        if self.kind not in SCHEME_LABELS:
            raise ValueError(f"unknown scheme kind: {self.kind!r}")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.ordering not in ("sequential", "environment"):
            raise ValueError(f"unknown ordering: {self.ordering!r}")
        if self.restarts < 1 or self.polish_draws < 0 or self.polish_scale < 0:
            raise ValueError("restarts must be >= 1, polish settings nonnegative")
        if self.kind == "ewdft":
            self.ordering = "environment"

    @property
    def label(self) -> str:
        return SCHEME_LABELS[self.kind]


@dataclass
class TrialEnv:
    """Shared per-trial context: pilot, powers, and record provenance."""

    pilot: np.ndarray
    bs_noise_power: float         # watts; 0 under noiseless training
    ue_noise_power: float
    p_d: float                    # downlink power budget, watts
    n_streams: int
    p_d_dbm: float
    p_u_dbm: float
    trial: int
    seed: int
    perfect_csi: bool = False     # weight design sees the true stacked channel


def _block_rng_factory(tree: SeedPath):
    return lambda i: tree.child("block", i).generator()


def _design_and_score(h_est: np.ndarray, env: TrialEnv):
    """Precoder for an estimated composite channel and its estimated capacity."""
    sol = svd_precoder(h_est, env.n_streams, env.p_d, env.ue_noise_power)
    return sol, capacity(h_est, sol.w, env.ue_noise_power)




def _record(env: TrialEnv, spec: SchemeSpec, realization, phi, w,
            q_used: int, iterations: int = 0, converged: bool = True,
            check_modulus: bool = True) -> CapacityRecord:
    achieved = capacity(effective_channel(realization, phi, check_modulus),
                        w, env.ue_noise_power)
    return CapacityRecord(
        scheme=spec.label, capacity=achieved, q_used=q_used,
        p_d_dbm=env.p_d_dbm, p_u_dbm=env.p_u_dbm,
        n_elements=realization.n_elements, trial=env.trial, seed=env.seed,
        iterations=iterations, converged=converged)


def run_random_phase(realization: ChannelRealization, spec: SchemeSpec,
                     env: TrialEnv, tree: SeedPath) -> CapacityRecord:
    """Uniform random RC; one training block feeds the precoder design."""
    rng = tree.child("phase").generator()
    phi = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, realization.n_elements))
    if spec.genie_precoder:
        h_for_design = effective_channel(realization, phi)
    else:
        codebook = Codebook(codewords=phi[None, :],
                            a_matrix=np.concatenate([[1.0 + 0j], phi])[:, None],
                            order=np.array([0]))
        obs = collect_observations(realization, codebook, env.pilot,
                                   env.bs_noise_power, _block_rng_factory(tree))
        h_for_design = estimate_composite(obs.per_block[0], env.pilot)
    sol, _ = _design_and_score(h_for_design, env)
    return _record(env, spec, realization, phi, sol.w, q_used=1)


def run_codeword_selection(realization: ChannelRealization, spec: SchemeSpec,
                           env: TrialEnv, tree: SeedPath,
                           codebook: Codebook | None = None) -> CapacityRecord:
    """Conventional codebook scheme: observe Q codewords, keep the best.

    Covers both the random codebook (drawn per trial) and the DFT codebook.
    Each codeword is scored by the capacity of its estimated composite channel
    under its own SVD/water-filling precoder; the argmax codeword is then
    evaluated on the true channel with that precoder.
    """
    if codebook is None:
        if spec.kind == "ranc":
            codebook = random_codebook(realization.n_elements, spec.q,
                                       tree.child("codebook").generator())
        else:
            codebook = dft_codebook(realization.n_elements, spec.q)
    obs = collect_observations(realization, codebook, env.pilot,
                               env.bs_noise_power, _block_rng_factory(tree))
    best = None
    for i, y in enumerate(obs.per_block):
        sol, score = _design_and_score(estimate_composite(y, env.pilot), env)
        if best is None or score > best[0]:
            best = (score, i, sol)
    _, idx, sol = best
    return _record(env, spec, realization, codebook.codewords[idx], sol.w,
                   q_used=codebook.q)


def run_weighted_dft(realization: ChannelRealization, spec: SchemeSpec,
                     env: TrialEnv, tree: SeedPath) -> CapacityRecord:
    """Weighted DFT codebook scheme, sequential or environment-aware order.

    Pipeline: choose the codeword order, run Q training blocks, form the
    design channel (the true stack under perfect CSI, the minimum-norm
    estimate otherwise), run the phase-align fixed point from the
    best-observed codewords, compose candidate RC vectors (the fixed-point
    output plus seeded phase perturbations of its weights), and keep
    whichever candidate, or observed codeword, scores highest on the design
    channel. The floor at the best observed codeword is what makes the
    scheme dominate plain codeword selection: the quadratic surrogate
    ascends monotonically but is not capacity itself.
    """
    n = realization.n_elements
    order = None
    if spec.ordering == "environment":
        order = environment_aware_order(realization, m_t=spec.ref_antenna_tx,
                                        m_r=spec.ref_antenna_rx)
    codebook = dft_codebook(n, spec.q, order)
    obs = collect_observations(realization, codebook, env.pilot,
                               env.bs_noise_power, _block_rng_factory(tree))
    if env.perfect_csi:
        design = stack_channels(realization)
    else:
        design = estimate_stacked(obs)

    scores = []
    precoders = []
    for y in obs.per_block:
        sol, score = _design_and_score(estimate_composite(y, env.pilot), env)
        scores.append(score)
        precoders.append(sol)
    ranked = np.argsort(-np.asarray(scores), kind="stable")
    best_idx = int(ranked[0])

    basis = stream_basis(design, env.n_streams)
    gram = block_gram(basis, obs.m_t)
    polish_rng = tree.child("polish").generator()

    chosen = (scores[best_idx], codebook.codewords[best_idx], precoders[best_idx].w)
    iterations, converged = 0, True
    for restart, init in enumerate(ranked[:min(spec.restarts, codebook.q)]):
        k0 = initial_weights(codebook.a_matrix, codebook.codewords[int(init)])
        solution = optimize_weights(WeightProblem(
            b=gram, a_q=codebook.a_matrix, k0=k0,
            tolerance=spec.tolerance, max_iterations=spec.max_iterations))
        if restart == 0:
            iterations, converged = solution.iterations, solution.converged
        candidates = [solution.phi]
        for _ in range(spec.polish_draws):
            perturbed = solution.k * np.exp(
                1j * spec.polish_scale * polish_rng.standard_normal(codebook.q))
            candidates.append(compose_reflection(codebook.a_matrix, perturbed))
        for phi in candidates:
            precoder, score = _design_and_score(design.composite(phi), env)
            if score > chosen[0]:
                chosen = (score, phi, precoder.w)

    _, phi, w = chosen
    return _record(env, spec, realization, phi, w,
                   q_used=codebook.q, iterations=iterations,
                   converged=converged)


def run_scheme(realization: ChannelRealization, spec: SchemeSpec,
               env: TrialEnv, tree: SeedPath) -> CapacityRecord:
    if spec.kind == "random":
        return run_random_phase(realization, spec, env, tree)
    if spec.kind in ("ranc", "dftc"):
        return run_codeword_selection(realization, spec, env, tree)
    return run_weighted_dft(realization, spec, env, tree)
