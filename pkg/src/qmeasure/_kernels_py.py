"""Pure numpy twin of the compiled sampler; same streams, same layout."""

import numpy as np

K_SEED = np.uint64(0x9E3779B97F4A7C15)
K_TRIAL = np.uint64(0xD1B54A32D192ED03)
K_DRAW = np.uint64(0x8CB92BA72F3D8DD7)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = z + K_SEED
    z = (z ^ (z >> np.uint64(30))) * M1
    z = (z ^ (z >> np.uint64(27))) * M2
    return z ^ (z >> np.uint64(31))


def _uniform(seed: int, trials: np.ndarray, draw: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        key = np.uint64(seed) * K_SEED + trials * K_TRIAL + np.uint64(draw) * K_DRAW
        h = _mix(key)
    return ((h >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53


def _normal(seed, trials, draw):
    u1, u2 = _uniform(seed, trials, draw), _uniform(seed, trials, draw + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _trials(start, count):
    return np.arange(start, start + count, dtype=np.uint64)


def uniforms(seed, start, count, draw):
    return _uniform(seed, _trials(start, count), draw)


def sample_local(seed, start, count, n, mu, ux, uy, uz, exact, cdf, j0):
    t = _trials(start, count)
    sh = np.sqrt(mu / (2.0 * (2.0 * mu - 1.0) ** 2))
    out = np.empty((count, 3))
    out[:, 0] = ux + sh * _normal(seed, t, 0)
    out[:, 1] = uy + sh * _normal(seed, t, 2)
    if exact:
        idx = np.searchsorted(np.asarray(cdf), _uniform(seed, t, 4), side="left")
        j = j0 + np.minimum(idx, len(cdf) - 1)
        out[:, 2] = j / np.sqrt(n) - np.sqrt(n) * (mu - 0.5) + np.sqrt(1.0 / (2.0 * np.sqrt(n))) * _normal(seed, t, 5)
    else:
        out[:, 2] = uz + np.sqrt(mu * (1.0 - mu)) * _normal(seed, t, 4)
    return out
