"""Seeded forward sampling and plug-in frequency estimation.

The sampler uses the Philox (4x64) counter-based generator keyed by the
seed, as implemented by ``numpy.random.Philox``. With ``k`` endogenous
variables in topological order, row ``i`` of the dataset consumes exactly
the uniform variates at stream positions ``i*k`` through ``i*k + k - 1``
(one per variable, in topological order), each mapped to a noise value by
inverse CDF over the noise support. Because rows own disjoint,
counter-addressable slices of the stream, any parallel implementation that
jumps the counter reproduces the identical dataset; the result depends only
on ``(model, n, seed)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ModelError
from .joint import Assignment, JointTable
from .scm import Scm


@dataclass(frozen=True)
class Dataset:
    """Rows of sampled (or loaded) endogenous states.

    ``codes[i, j]`` is the state index of variable ``variables[j]`` in row
    ``i``; labels are materialized only for serialization."""

    variables: tuple[tuple[str, tuple[str, ...]], ...]
    codes: np.ndarray
    provenance: Optional[tuple] = None

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    def to_csv(self) -> str:
        lines = [",".join(self.names)]
        columns = [np.asarray(states, dtype=object)[self.codes[:, j]] for j, (_, states) in enumerate(self.variables)]
        for row in zip(*columns):
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str, variables) -> "Dataset":
        variables = tuple((n, tuple(s)) for n, s in variables)
        lines = text.strip().split("\n")
        header = lines[0].split(",")
        names = [n for n, _ in variables]
        if header != names:
            raise ModelError(f"csv header {header} does not match declared variables {names}")
        index = [{s: i for i, s in enumerate(states)} for _, states in variables]
        codes = np.empty((len(lines) - 1, len(variables)), dtype=np.int64)
        for i, line in enumerate(lines[1:]):
            cells = line.split(",")
            if len(cells) != len(variables):
                raise ModelError(f"csv row {i + 1} has {len(cells)} cells, expected {len(variables)}")
            for j, cell in enumerate(cells):
                if cell not in index[j]:
                    raise ModelError(f"csv row {i + 1}: {cell!r} is not a state of {names[j]}")
                codes[i, j] = index[j][cell]
        return Dataset(variables, codes)


def sample_dataset(model: Scm, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. rows from the model's observational law."""
    if n < 1:
        raise ModelError("sample size must be at least 1")
    order = model.topological_order
    k = len(order)
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((n, k))

    state_index = {
        name: {s: i for i, s in enumerate(model.variable(name).states)} for name in order
    }
    codes: dict[str, np.ndarray] = {}
    for j, name in enumerate(order):
        noise = model.noises[name]
        cum = np.cumsum([float(p) for p in noise.probs])
        cum[-1] = 1.0  # guard against rounding at the top end
        noise_idx = np.searchsorted(cum, u[:, j], side="right")

        mech = model.mechanisms[name]
        parent_sizes = [len(model.variable(p).states) for p in mech.parents]
        table = np.empty(parent_sizes + [len(noise.support)], dtype=np.int64)
        for combo_idx in itertools.product(*(range(s) for s in parent_sizes)):
            combo = tuple(
                model.variable(p).states[i] for p, i in zip(mech.parents, combo_idx)
            )
            for ui, uval in enumerate(noise.support):
                table[combo_idx + (ui,)] = state_index[name][mech.table[(combo, uval)]]
        if mech.parents:
            parent_codes = tuple(codes[p] for p in mech.parents)
            codes[name] = table[parent_codes + (noise_idx,)]
        else:
            codes[name] = table[(noise_idx,)]

    stacked = np.column_stack([codes[name] for name in order])
    variables = tuple((name, model.variable(name).states) for name in order)
    return Dataset(variables, stacked, provenance=("model", seed))


def fit_frequency_joint(data: Dataset) -> JointTable:
    """Empirical joint with exact rational cell probabilities count/n.

    No smoothing: cells never observed are absent, so empirical positivity
    failures surface exactly like population ones."""
    sizes = np.array([len(states) for _, states in data.variables], dtype=np.int64)
    strides = np.ones_like(sizes)
    for j in range(len(sizes) - 2, -1, -1):
        strides[j] = strides[j + 1] * sizes[j + 1]
    flat = data.codes @ strides
    counts = np.bincount(flat, minlength=int(np.prod(sizes)))
    entries: dict[Assignment, Fraction] = {}
    n = data.n
    for flat_idx in np.nonzero(counts)[0]:
        key = []
        rem = int(flat_idx)
        for j in range(len(sizes)):
            q, rem = divmod(rem, int(strides[j]))
            key.append(data.variables[j][1][q])
        entries[tuple(key)] = Fraction(int(counts[flat_idx]), n)
    return JointTable(data.variables, entries)


def plugin_estimate(data: Dataset, expr, roles):
    """Evaluate an estimand on the empirical joint (plug-in principle).

    Returns ``(value, diagnostics)``; empirical positivity failures raise,
    never silently extrapolate."""
    from .estimand import IdentSource, evaluate

    joint = fit_frequency_joint(data)
    value = evaluate(expr, IdentSource(joint, roles))
    return value, ()
