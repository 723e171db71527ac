"""Shared builders for randomized test sweeps.

Parameter ranges are chosen so every generated model is numerically tame:
gamma bounded away from 0 keeps saturation horizons representable and the
small-time limit checks fast, atom coordinates bounded away from 0 keep
inverse-load root finding well conditioned.
"""

import numpy as np

from frailtykit import (
    DiscreteFrailty,
    Family,
    FrailtyKind,
    FrailtyStructure,
    HazardSpec,
    ModelSpec,
    normalize_to_unit_mean,
)

ALL_FAMILIES = (Family.EXPONENTIAL, Family.WEIBULL, Family.GAMMA,
                Family.LOGLOGISTIC)
ALL_KINDS = (FrailtyKind.SHARED, FrailtyKind.CORRELATED,
             FrailtyKind.SHARED_CAUSE_SPECIFIC,
             FrailtyKind.CORRELATED_CAUSE_SPECIFIC)


def random_hazard(rng, families=ALL_FAMILIES, gamma_range=(0.9, 3.0),
                  alpha_range=(0.3, 1.8)):
    family = families[rng.integers(len(families))]
    gamma = 1.0 if family is Family.EXPONENTIAL else float(
        rng.uniform(*gamma_range))
    alpha = float(rng.uniform(*alpha_range))
    return HazardSpec(family, gamma, alpha)


def random_frailty(structure, rng, num_atoms, coord_range=(0.4, 2.0)):
    atoms = rng.uniform(*coord_range,
                        size=(num_atoms, structure.dimension))
    weights = rng.uniform(0.2, 1.0, size=num_atoms)
    weights = weights / weights.sum()
    return normalize_to_unit_mean(
        DiscreteFrailty(structure, atoms, weights))


def random_model(kind, rng, num_atoms=None, families=ALL_FAMILIES,
                 gamma_range=(0.9, 3.0), alpha_range=(0.3, 1.8),
                 num_causes=2):
    structure = FrailtyStructure(kind, num_causes, num_causes)
    if num_atoms is None:
        num_atoms = int(rng.integers(2, 5))
    hazards = {
        (k, j): random_hazard(rng, families, gamma_range, alpha_range)
        for k in (1, 2) for j in range(1, num_causes + 1)
    }
    frailty = random_frailty(structure, rng, num_atoms)
    return ModelSpec(structure, hazards, frailty)


def perturb_model(m, rng, magnitude=0.15):
    """A definitely-different model: one hazard parameter moved by at least
    ``magnitude`` relative, frailty kept identical."""
    keys = sorted(m.hazards)
    key = keys[rng.integers(len(keys))]
    spec = m.hazard(*key)
    bump = 1.0 + magnitude * (1.0 if rng.random() < 0.5 else -0.5)
    if spec.family is not Family.EXPONENTIAL and rng.random() < 0.5:
        new = HazardSpec(spec.family, spec.gamma * bump, spec.alpha)
    else:
        new = HazardSpec(spec.family, spec.gamma, spec.alpha * bump)
    hazards = dict(m.hazards)
    hazards[key] = new
    return ModelSpec(m.structure, hazards, m.frailty)


def perturb_frailty(m, rng, shift=0.15):
    """A model with the same hazards and a genuinely different mean-1
    frailty: one atom coordinate bumped, then the column renormalized, which
    changes the atom ratio along that coordinate."""
    g = m.frailty
    atoms = np.array(g.atoms)
    weights = np.array(g.weights)
    if g.num_atoms == 1:
        atoms = np.vstack([atoms * (1.0 - shift), atoms * (1.0 + shift)])
        weights = np.array([0.5, 0.5])
    else:
        col = int(rng.integers(atoms.shape[1]))
        atoms[0, col] *= 1.0 + shift
    g2 = normalize_to_unit_mean(
        DiscreteFrailty(g.structure, atoms, weights))
    return ModelSpec(m.structure, dict(m.hazards), g2)
