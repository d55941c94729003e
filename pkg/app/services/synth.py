"""Deterministic synthetic enterprise generator.

value(t, j) = base_level + noise_scale * (w * g(t, group(j)) + (1 - w) * e(t, j))

Random stream: SplitMix64. Output i (1-based) is mix(seed + i * gamma), so
the stream is computed in one vectorised pass. Uniforms take the top 53
bits; each standard normal consumes two uniforms through the Box-Muller
cosine branch, sqrt(-2 ln(1 - u1)) * cos(2 pi u2).

Draw order, period-major: for t = 1..T_max, one driver per group (group
order as declared), then one noise term per process (column order). All
draws happen whatever the weights are, so changing a weight never shifts
the stream.
"""

import math

import numpy as np

from app.models.enterprise import EnterpriseModel
from app.models.schemas import SynthSpec

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_MULTIPLIER_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_MULTIPLIER_2 = np.uint64(0x94D049BB133111EB)
UNIFORM_SCALE = 2.0**-53


class SplitMix64:
    """SplitMix64 stream over uint64 arithmetic (wrapping mod 2**64)."""

    def __init__(self, seed: int) -> None:
        self._seed = np.uint64(seed)
        self._drawn = 0

    @property
    def drawn(self) -> int:
        """Raw outputs consumed so far."""
        return self._drawn

    def next_raw(self, count: int) -> np.ndarray:
        steps = np.arange(self._drawn + 1, self._drawn + count + 1, dtype=np.uint64)
        self._drawn += count
        z = self._seed + steps * GOLDEN_GAMMA
        z = (z ^ (z >> np.uint64(30))) * MIX_MULTIPLIER_1
        z = (z ^ (z >> np.uint64(27))) * MIX_MULTIPLIER_2
        return z ^ (z >> np.uint64(31))

    def uniforms(self, count: int) -> np.ndarray:
        """Doubles in [0, 1) with 53 random bits."""
        return (self.next_raw(count) >> np.uint64(11)).astype(np.float64) * UNIFORM_SCALE

    def normals(self, count: int) -> np.ndarray:
        """Standard normals, two uniforms each.

        Scalar ``math`` transcendentals keep the bits independent of numpy's
        SIMD dispatch.
        """
        uniforms = self.uniforms(2 * count).tolist()
        return np.array(
            [
                math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
                for u1, u2 in zip(uniforms[0::2], uniforms[1::2], strict=True)
            ],
            dtype=np.float64,
        )


def generate(spec: SynthSpec) -> EnterpriseModel:
    """Generate a synthetic enterprise model; identical specs give identical models."""
    groups = spec.groups
    group_of = np.empty(spec.n, dtype=np.intp)
    for g, members in enumerate(groups):
        group_of[list(members)] = g

    draws_per_period = len(groups) + spec.n
    deviates = SplitMix64(spec.seed).normals(spec.periods * draws_per_period)
    deviates = deviates.reshape(spec.periods, draws_per_period)
    drivers = deviates[:, : len(groups)]
    noise = deviates[:, len(groups) :]

    weight = spec.driver_weight
    mixed = weight * drivers[:, group_of] + (1.0 - weight) * noise
    values = spec.base_level + spec.noise_scale * mixed

    return EnterpriseModel(
        process_ids=spec.process_ids,
        values=values,
        label=spec.label or f"synth-{spec.seed}",
    )
