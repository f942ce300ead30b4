from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._backend import max_workers


def trial_rngs(seed, trials):
    """Independent generators for each trial, derived from the root seed by trial index."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def run_trials(fn, seed, trials):
    """Run ``fn(trial_index, rng)`` for every trial; results come back in trial order."""
    rngs = trial_rngs(seed, trials)
    workers = min(max_workers(), trials)
    if workers <= 1:
        return [fn(t, rng) for t, rng in enumerate(rngs)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials), rngs))
