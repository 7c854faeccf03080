"""Random LCQP and MI-LCQP instances.

Every instance is drawn from its own PCG64 stream ``rng_for(config.seed, index)``, so datasets
are reproducible across platforms and the first k instances of a dataset do not depend on how
many more follow.
"""
import json
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from .instance import AnyInstance, LCQPInstance, MILCQPInstance, Sense
from .load_instance import read_instance, write_instance
from .options import GenConfig, SolverOptions
from .solvers import SolveResult, TargetLabels, read_label, solve_lcqp, solve_milcqp, write_label
from .utils import FS, logger, rng_for

MANIFEST = 'manifest.json'
FACTOR_LOW = 0.25

# Stream ids, appended after the dataset seed
STRUCTURE_STREAM = 0
OBJECTIVE_STREAM = 1


def make_sparse_spd(n: int, alpha: float, seed: Union[int, np.random.Generator]) -> sparse.csr_array:
    """B B^T for a random unit lower-triangular B.

    Each entry below the diagonal of B is zero with probability ``alpha``, otherwise uniform on
    [-1, -0.25] or [0.25, 1]. The result is exactly symmetric and positive definite.
    """
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed)
    B = np.eye(n)
    rows, cols = np.tril_indices(n, -1)
    keep = rng.random(len(rows)) >= alpha
    values = rng.uniform(FACTOR_LOW, 1.0, len(rows)) * rng.choice((-1.0, 1.0), len(rows))
    B[rows[keep], cols[keep]] = values[keep]
    M = B @ B.T
    upper = np.triu(M)
    return sparse.csr_array(upper + np.triu(M, 1).T)


def _constraints(config: GenConfig, rng: np.random.Generator, sigma_A: float, sigma_b: float):
    m, n = config.m, config.n
    A = np.zeros((m, n))
    positions = rng.choice(m * n, size=config.nnz_A, replace=False)
    A.flat[positions] = rng.normal(0.0, sigma_A, config.nnz_A)
    b = rng.normal(0.0, sigma_b, m)
    senses = [Sense.EQ if eq else Sense.LE for eq in rng.random(m) < config.eq_prob]
    return A, b, senses


def _bounds(n: int, rng: np.random.Generator, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    l = rng.normal(0.0, sigma, n)
    u = rng.normal(0.0, sigma, n)
    return np.minimum(l, u), np.maximum(l, u)


def _generic(config: GenConfig, rng: np.random.Generator):
    Q = make_sparse_spd(config.n, config.alpha, rng)
    c = rng.normal(0.0, config.c_sigma, config.n)
    A, b, senses = _constraints(config, rng, config.a_sigma, config.b_sigma)
    l, u = _bounds(config.n, rng, config.bound_sigma)
    return Q, c, A, b, senses, l, u


def gen_lcqp(config: Optional[GenConfig] = None, index: int = 0) -> LCQPInstance:
    config = config or GenConfig()
    Q, c, A, b, senses, l, u = _generic(config, rng_for(config.seed, index))
    return LCQPInstance.create(Q, c, A, b, senses, l, u,
                               meta={'generator': 'lcqp', 'seed': config.seed, 'index': index})


def gen_milcqp(config: Optional[GenConfig] = None, index: int = 0) -> MILCQPInstance:
    """Like gen_lcqp, with every variable integer with probability ``config.integer_prob``.

    Bounds of integer variables are clamped to [-integer_bound, integer_bound].
    When more than ``config.max_integer`` variables are drawn integer, a random subset of that
    size keeps integrality.
    """
    config = config or GenConfig()
    rng = rng_for(config.seed, index)
    Q, c, A, b, senses, l, u = _generic(config, rng)
    integer = rng.random(config.n) < config.integer_prob
    if config.max_integer is not None and integer.sum() > config.max_integer:
        keep = rng.choice(np.flatnonzero(integer), size=config.max_integer, replace=False)
        integer = np.zeros(config.n, dtype=bool)
        integer[keep] = True
    K = float(config.integer_bound)
    clamped = integer & ((l < -K) | (u > K))
    l = np.where(integer, np.clip(l, -K, K), l)
    u = np.where(integer, np.clip(u, -K, K), u)
    if clamped.any():
        logger.warning("Instance %d: clamped bounds of %d integer variables to [%g, %g]",
                       index, int(clamped.sum()), -K, K)
    meta = {'generator': 'milcqp', 'seed': config.seed, 'index': index, 'integer_bounds_clamped': K}
    return MILCQPInstance.create(Q, c, A, b, senses, l, u, np.flatnonzero(integer), meta)


def gen_fixed_structure(config: Optional[GenConfig] = None, count: int = 1, start: int = 0) -> List[LCQPInstance]:
    """Instances sharing Q, A, b, senses and bounds, differing only in c.

    Q follows the generic scheme; c, the entries of A and b have variance 1/n and the bounds
    variance 1. Instance ``start + k`` is the same whatever ``count`` is, so held-out sets are
    drawn from the same structure with a ``start`` past the training indices.
    """
    config = config or GenConfig()
    if count < 1:
        raise ValueError("count must be at least 1")
    n = config.n
    rng = rng_for(config.seed, STRUCTURE_STREAM)
    Q = make_sparse_spd(n, config.alpha, rng)
    scale = np.sqrt(1.0 / n)
    A, b, senses = _constraints(config, rng, scale, scale)
    l, u = _bounds(n, rng, 1.0)

    out = []
    for index in range(start, start + count):
        c = rng_for(config.seed, OBJECTIVE_STREAM, index).normal(0.0, scale, n)
        out.append(LCQPInstance.create(Q, c, A, b, senses, l, u,
                                       meta={'generator': 'fixed-structure', 'seed': config.seed, 'index': index}))
    return out


def gen_symmetric_lcqp(config: Optional[GenConfig] = None, block_size: int = 3, index: int = 0) -> LCQPInstance:
    """An instance whose variables 0..block_size-1 are interchangeable.

    A generic instance on n - block_size + 1 variables has its variable 0 copied block_size times:
    the copies share their column of A, their c, l and u, and Q = E Q' E^T where E maps each copy
    to the original. Swapping two copies maps the instance onto itself.
    """
    config = config or GenConfig()
    if not 2 <= block_size <= config.n:
        raise ValueError("block_size must be in [2, n], got %r" % block_size)
    small = config.replace(n=config.n - block_size + 1, nnz_A=min(config.nnz_A, config.m * (config.n - block_size + 1)))
    Q, c, A, b, senses, l, u = _generic(small, rng_for(config.seed, index))
    source = np.array([0] * block_size + list(range(1, small.n)))
    E = np.zeros((config.n, small.n))
    E[np.arange(config.n), source] = 1.0
    QE = E @ Q.toarray() @ E.T
    return LCQPInstance.create(QE, c[source], A[:, source], b, senses, l[source], u[source],
                               meta={'generator': 'symmetric', 'seed': config.seed, 'index': index,
                                     'symmetric_block': list(range(block_size))})


def instance_filename(index: int) -> str:
    return 'instance_%05d.json' % index


def write_dataset(instances: Sequence[AnyInstance], out_dir: str, config: GenConfig,
                  extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Writes one document per instance plus a manifest listing files, seeds and the config hash.

    Returns the manifest.
    """
    FS.makedirs(out_dir)
    files, seeds = [], []
    for k, instance in enumerate(instances):
        index = instance.base.meta.get('index', k)
        name = instance_filename(index)
        write_instance(instance, os.path.join(out_dir, name))
        files.append(name)
        seeds.append([config.seed, index])
    manifest = {
        'files': files,
        'seeds': seeds,
        'config': config.serialize(),
        'config_hash': config.config_hash(),
    }
    if extra:
        manifest.update(extra)
    with FS.open(os.path.join(out_dir, MANIFEST), 'w') as f:
        f.write(json.dumps(manifest, sort_keys=True, indent=1) + '\n')
    logger.info("Wrote %d instances to %s", len(files), out_dir)
    return manifest


def read_manifest(out_dir: str) -> Dict[str, Any]:
    with FS.open(os.path.join(out_dir, MANIFEST)) as f:
        return json.load(f)


def dataset_paths(out_dir: str) -> List[str]:
    return [os.path.join(out_dir, name) for name in read_manifest(out_dir)['files']]


def _solve(instance: AnyInstance, options: SolverOptions) -> SolveResult:
    if instance.integer_set:
        return solve_milcqp(instance, options)
    return solve_lcqp(instance, options)


def label_dataset(paths: Sequence[str], options: Optional[SolverOptions] = None,
                  overwrite: bool = False) -> List[TargetLabels]:
    "Solves every instance file, caching results in sidecar documents"
    options = options or SolverOptions()
    labels = []
    for path in paths:
        result = None if overwrite else read_label(path)
        if result is None:
            result = _solve(read_instance(path), options)
            write_label(result, path)
        labels.append(TargetLabels.from_result(result))
    return labels


def load_dataset(out_dir: str, options: Optional[SolverOptions] = None) -> List[Tuple[AnyInstance, TargetLabels]]:
    "Instances of a dataset with their labels, solving those without a sidecar"
    paths = dataset_paths(out_dir)
    labels = label_dataset(paths, options)
    return [(read_instance(p), y) for p, y in zip(paths, labels)]
