"""Real-coded genetic algorithm over the six controller decision variables.

The fitness is the weighted integral of time-multiplied squared error
plus squared control effort, evaluated by closed-loop simulation either
once (deterministic scenarios) or as an expected value over several
derived seeds (stochastic scenarios).
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from . import sim
from .controller import FuzzyFOPIDConfig
from .errors import DivergedSimulation

PENALTY = 1e12  # stands in for J when a candidate diverges the loop

GENE_NAMES = ("K_e", "K_d", "K_PI", "K_PD", "lambda_order", "mu_order")

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass(frozen=True)
class ObjectiveSpec:
    """Weights of the tracking and control-effort terms."""

    w1: float = 0.5
    w2: float = 0.5

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0 or (self.w1 == 0 and self.w2 == 0):
            raise ValueError("weights must be >= 0 and not both zero")


@dataclass(frozen=True)
class GAConfig:
    """Search hyperparameters and box bounds for the six genes."""

    population: int = 20
    generations: int = 50
    crossover_fraction: float = 0.8
    mutation_fraction: float = 0.2
    elite_count: int = 1
    lower: tuple[float, ...] = (1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3)
    upper: tuple[float, ...] = (10.0, 10.0, 10.0, 10.0, 1.0, 1.0)
    stochastic_evals: int = 1
    seed: int = 0
    stall_generations: int = 15
    stall_tol: float = 1e-8

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be >= 4")
        for name in ("crossover_fraction", "mutation_fraction"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(self.lower) != len(self.upper):
            raise ValueError("bounds length mismatch")
        if any(l >= u for l, u in zip(self.lower, self.upper)):
            raise ValueError("each lower bound must be below its upper bound")
        if self.stochastic_evals < 1:
            raise ValueError("stochastic_evals must be >= 1")


def genome_to_config(genome, dt: float) -> FuzzyFOPIDConfig:
    g = np.asarray(genome, dtype=float)
    return FuzzyFOPIDConfig(g[0], g[1], g[2], g[3], g[4], g[5], dt)


def evaluate_objective(candidate: FuzzyFOPIDConfig, scenario: sim.Scenario,
                       weights: ObjectiveSpec = ObjectiveSpec()) -> float:
    """Closed-loop objective for one candidate on one scenario.

    A diverged simulation is scored with the penalty value instead of
    raising, so a whole population can be ranked without exceptions.
    """
    scn = replace(scenario, controller=candidate)
    try:
        res = sim.run_scenario(scn)
    except DivergedSimulation:
        return PENALTY
    integrand = weights.w1 * res.t * res.e ** 2 + weights.w2 * res.u ** 2
    return float(_trapz(integrand, res.t))


def expected_objective(candidate: FuzzyFOPIDConfig, scenario: sim.Scenario,
                       K: int, weights: ObjectiveSpec = ObjectiveSpec()) -> float:
    """Mean objective over K runs with seeds base, base+1, ..., base+K-1."""
    if K < 1:
        raise ValueError("K must be >= 1")
    vals = [evaluate_objective(candidate,
                               replace(scenario, seed=scenario.seed + i),
                               weights)
            for i in range(K)]
    return float(np.mean(vals))


def ga_optimize(ga: GAConfig, objective):
    """Minimize objective(genome) over the bounded box.

    Selection is by tournament, recombination by blend crossover on the
    extended parent interval, and mutation by a per-gene non-uniform
    step toward a bound whose size anneals to zero over the generation
    budget (large early moves for exploration, fine late moves for
    refinement). The best elite_count individuals survive unchanged, so
    the best-J history is non-increasing. Returns
    (best genome, best J, history).
    """
    rng = np.random.default_rng(ga.seed)
    lower = np.asarray(ga.lower)
    upper = np.asarray(ga.upper)
    n_genes = len(lower)
    pop = rng.uniform(lower, upper, (ga.population, n_genes))
    fitness = np.array([objective(p) for p in pop])
    history = [float(fitness.min())]
    stall = 0

    def tournament():
        idx = rng.integers(0, ga.population, 4)
        return pop[idx[np.argmin(fitness[idx])]]

    for g in range(ga.generations):
        order = np.argsort(fitness, kind="stable")
        anneal = (1.0 - g / ga.generations) ** 3
        children = [pop[order[i]].copy() for i in range(ga.elite_count)]
        while len(children) < ga.population:
            p1, p2 = tournament(), tournament()
            if rng.random() < ga.crossover_fraction:
                lo = np.minimum(p1, p2)
                hi = np.maximum(p1, p2)
                span = hi - lo
                child = rng.uniform(lo - 0.5 * span, hi + 0.5 * span)
            else:
                child = p1.copy()
            np.clip(child, lower, upper, out=child)
            for i in range(n_genes):
                if rng.random() < ga.mutation_fraction:
                    frac = 1.0 - rng.random() ** anneal
                    if rng.random() < 0.5:
                        child[i] += (upper[i] - child[i]) * frac
                    else:
                        child[i] -= (child[i] - lower[i]) * frac
            np.clip(child, lower, upper, out=child)
            children.append(child)
        pop = np.array(children)
        fitness = np.array([objective(p) for p in pop])
        best = float(fitness.min())
        if best > history[-1]:
            best = history[-1]  # elitism carries the champion forward
        if history[-1] - best < ga.stall_tol:
            stall += 1
        else:
            stall = 0
        history.append(best)
        if stall >= ga.stall_generations:
            break
    # champion from the final population, else from history via elitism
    idx = int(np.argmin(fitness))
    best_genome = pop[idx].copy()
    best_j = min(history[-1], float(fitness[idx]))
    return best_genome, best_j, history


def tune_scenario(scenario: sim.Scenario, ga: GAConfig,
                  weights: ObjectiveSpec = ObjectiveSpec()) -> dict:
    """Full tuning run: GA over the scenario objective. Returns a JSON
    friendly result dict with the best parameters and the history."""

    def objective(genome):
        cand = genome_to_config(genome, scenario.dt)
        if ga.stochastic_evals == 1:
            return evaluate_objective(cand, scenario, weights)
        return expected_objective(cand, scenario, ga.stochastic_evals, weights)

    genome, best_j, history = ga_optimize(ga, objective)
    return {
        "best_parameters": dict(zip(GENE_NAMES, (float(v) for v in genome))),
        "best_J": best_j,
        "history": history,
        "config": {
            "population": ga.population,
            "generations": ga.generations,
            "crossover_fraction": ga.crossover_fraction,
            "mutation_fraction": ga.mutation_fraction,
            "elite_count": ga.elite_count,
            "stochastic_evals": ga.stochastic_evals,
            "seed": ga.seed,
            "w1": weights.w1,
            "w2": weights.w2,
        },
    }


def write_tuning_result(result: dict, json_path: str,
                        leaderboard_path: str | None = None):
    with open(json_path, "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if leaderboard_path:
        exists = os.path.exists(leaderboard_path)
        with open(leaderboard_path, "a", newline="") as fh:
            w = csv.writer(fh)
            if not exists:
                w.writerow(list(GENE_NAMES) + ["J", "seed"])
            p = result["best_parameters"]
            w.writerow(["%.10g" % p[k] for k in GENE_NAMES]
                       + ["%.10g" % result["best_J"], result["config"]["seed"]])
