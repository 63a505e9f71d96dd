"""Pre-partitioned batch execution with order-independent merging."""

from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigurationError
from .rng import make_rng
from .stats import batch_sizes, merge


def default_batch_size(n, budget=1 << 21, cap=10_000):
    return max(1, min(cap, budget // max(int(n), 1)))


def run_batches(work, samples, seed, batch_size, workers=1):
    """Run ``work(index, size, rng)`` over a fixed partition of ``samples``.

    ``work`` returns a tuple of mergeable results (EstimatorResult or int
    counters). Batch ``i`` draws from stream ``i`` of ``seed`` and the
    partials are merged in batch order, so ``workers`` never changes the
    output.
    """
    if samples < 1:
        raise ConfigurationError("must be positive", field="samples")
    if workers < 1:
        raise ConfigurationError("must be positive", field="workers")
    sizes = batch_sizes(samples, batch_size)

    def job(i):
        return work(i, sizes[i], make_rng(seed, i))

    if workers == 1 or len(sizes) == 1:
        partials = [job(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(job, range(len(sizes))))
    return tuple(
        sum(col) if isinstance(col[0], int) else merge(col) for col in zip(*partials)
    )
