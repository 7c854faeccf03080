import json
from typing import Any, Dict, Optional

from .exceptions import ConfigurationError, assert_config
from .utils import Serialize, sha256_digest


class Options(Serialize):
    """Base for the option bundles of qpgnn (solver, refinement, generation, network, training).

    Subclasses list every option with its default in ``_defaults``, which is the primary truth of
    which options are accepted, and document them in ``OPTIONS_DOC``.
    Unknown options are rejected with ``ConfigurationError``.
    """

    _defaults: Dict[str, Any] = {}
    OPTIONS_DOC = ""

    def __init__(self, options_dict: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        o = dict(options_dict or {}, **kwargs)

        options = {}
        for name, default in self._defaults.items():
            if name in o:
                value = o.pop(name)
                if isinstance(default, bool):
                    value = bool(value)
                elif isinstance(default, float) and isinstance(value, int):
                    value = float(value)
            else:
                value = default

            options[name] = value

        self.__dict__['options'] = options

        if o:
            raise ConfigurationError("Unknown options: %s" % sorted(o.keys()))

        self._validate()

    def _validate(self) -> None:
        pass

    def __getattr__(self, name: str) -> Any:
        try:
            return self.__dict__['options'][name]
        except KeyError as e:
            raise AttributeError(e)

    def __setattr__(self, name: str, value: Any) -> None:
        assert_config(name, self.options.keys(), "%r isn't a valid option. Expected one of: %s")
        self.options[name] = value

    def __eq__(self, other: Any) -> bool:
        return type(self) is type(other) and self.options == other.options

    def __repr__(self):
        return '%s(%s)' % (type(self).__name__, ', '.join('%s=%r' % kv for kv in self.options.items()))

    def replace(self, **changes) -> 'Options':
        return type(self)(self.options, **changes)

    def serialize(self) -> Dict[str, Any]:
        return dict(self.options)

    @classmethod
    def deserialize(cls, data: Dict[str, Any]) -> "Options":
        return cls(data)

    def config_hash(self) -> str:
        return sha256_digest(json.dumps(self.serialize(), sort_keys=True))


class SolverOptions(Options):
    """Tolerances and limits of the QP oracles
    """

    OPTIONS_DOC = r"""
    eps_psd
            Relative tolerance of the positive-semidefiniteness check: the smallest eigenvalue of Q
            may be as low as ``-eps_psd * ||Q||_F`` (Default: 1e-8)
    eps_feas
            Primal feasibility tolerance (Default: 1e-7)
    eps_kkt
            Largest KKT residual accepted for an OPTIMAL result (Default: 1e-6)
    gap_tol
            Stopping tolerance of the splitting iteration on primal and dual residuals (Default: 1e-9)
    admm_rho, admm_sigma, admm_alpha
            Step size, regularization and over-relaxation of the splitting iteration
            (Defaults: 0.1, 1e-6, 1.6)
    admm_max_iter
            Iteration limit of the splitting iteration (Default: 20000)
    polish_every
            Attempt an active-set polish every this many splitting iterations (Default: 25)
    simplex_max_iter
            Pivot limit of each simplex phase (Default: 5000)
    node_limit
            Branch-and-bound node budget (Default: 100000)
    enum_limit
            Largest number of integer assignments brute force will enumerate (Default: 10**6)
    int_tol
            Integrality tolerance of branch-and-bound (Default: 1e-6)
    log_every
            Log splitting residuals every this many iterations, at DEBUG level (Default: 500)
    """
    if __doc__:
        __doc__ += OPTIONS_DOC

    _defaults: Dict[str, Any] = {
        'eps_psd': 1e-8,
        'eps_feas': 1e-7,
        'eps_kkt': 1e-6,
        'gap_tol': 1e-9,
        'admm_rho': 0.1,
        'admm_sigma': 1e-6,
        'admm_alpha': 1.6,
        'admm_max_iter': 20000,
        'polish_every': 25,
        'simplex_max_iter': 5000,
        'node_limit': 100000,
        'enum_limit': 10**6,
        'int_tol': 1e-6,
        'log_every': 500,
    }

    def _validate(self) -> None:
        if not 0 < self.admm_alpha < 2:
            raise ConfigurationError("admm_alpha must be in (0, 2), got %r" % self.admm_alpha)
        for name in ('eps_psd', 'eps_feas', 'eps_kkt', 'gap_tol', 'admm_rho', 'admm_sigma'):
            if self.options[name] <= 0:
                raise ConfigurationError("%s must be positive, got %r" % (name, self.options[name]))


class RefineOptions(Options):
    """Options of the color refinement
    """

    OPTIONS_DOC = r"""
    quantize
            ``None`` (default) compares stored values bit-exactly. An integer q rounds every feature and
            edge weight to q decimal digits before comparison, for data read from external sources.
    max_rounds
            Upper bound on refinement rounds when searching for the stable partition.
            ``None`` (default) means m + n + 1.
    """
    if __doc__:
        __doc__ += OPTIONS_DOC

    _defaults: Dict[str, Any] = {
        'quantize': None,
        'max_rounds': None,
    }

    def _validate(self) -> None:
        if self.quantize is not None and (not isinstance(self.quantize, int) or self.quantize < 0):
            raise ConfigurationError("quantize must be None or a non-negative number of digits, got %r" % self.quantize)


class GNNConfig(Options):
    """Architecture of a message-passing network
    """

    OPTIONS_DOC = r"""
    num_layers
            Number of message-passing layers L, at least 1 (Default: 4)
    width
            Embedding size d of every node feature, at least 1 (Default: 64)
    variant
            "lcqp" aggregates A_ij * g(t_j) over all variables; "milcqp" applies g to the pair
            (t_j, A_ij) on every edge (Default: "lcqp")
    head
            "graph" outputs one number per graph, "node" one number per variable (Default: "graph")
    mlp_depth
            Linear layers in every message and update map (Default: 2)
    """
    if __doc__:
        __doc__ += OPTIONS_DOC

    _defaults: Dict[str, Any] = {
        'num_layers': 4,
        'width': 64,
        'variant': 'lcqp',
        'head': 'graph',
        'mlp_depth': 2,
    }

    def _validate(self) -> None:
        assert_config(self.variant, ('lcqp', 'milcqp'))
        assert_config(self.head, ('graph', 'node'))
        for name in ('num_layers', 'width', 'mlp_depth'):
            if not isinstance(self.options[name], int) or self.options[name] < 1:
                raise ConfigurationError("%s must be a positive integer, got %r" % (name, self.options[name]))


class Schedule(Options):
    """Optimizer schedule of ``train``
    """

    OPTIONS_DOC = r"""
    lr
            Initial learning rate of Adam (Default: 5e-4)
    epochs
            Number of passes over the training set (Default: 1000)
    patience
            Epochs without a new best training error before the learning rate is halved and the
            best parameters are restored (Default: 50)
    batch_size
            Graphs per mini-batch; each mini-batch is merged into one graph (Default: 2500)
    seed
            Seed of the shuffling order (Default: 0)
    eval_every
            Evaluate the validation set every this many epochs, if one is given (Default: 1)
    """
    if __doc__:
        __doc__ += OPTIONS_DOC

    _defaults: Dict[str, Any] = {
        'lr': 5e-4,
        'epochs': 1000,
        'patience': 50,
        'batch_size': 2500,
        'seed': 0,
        'eval_every': 1,
    }

    def _validate(self) -> None:
        if self.lr <= 0:
            raise ConfigurationError("lr must be positive, got %r" % self.lr)
        for name in ('epochs', 'patience', 'batch_size', 'eval_every'):
            if self.options[name] < 1:
                raise ConfigurationError("%s must be at least 1, got %r" % (name, self.options[name]))


class GenConfig(Options):
    """Distribution of random instances
    """

    OPTIONS_DOC = r"""
    m, n
            Number of constraints and variables (Defaults: 10, 50)
    alpha
            Probability that an off-diagonal entry of the Cholesky factor of Q is zero (Default: 0.95)
    nnz_A
            Number of nonzero entries of A, at uniformly random positions (Default: 100)
    c_sigma, a_sigma, b_sigma, bound_sigma
            Standard deviations of c, the entries of A, b and the bounds (Defaults: 0.1, 1.0, 1.0, 10.0)
    eq_prob
            Probability that a constraint is an equality; the others are "<=" (Default: 0.3)
    integer_prob
            Probability that a variable is integer, for mixed-integer instances (Default: 0.5)
    integer_bound
            Integer variables get bounds clamped to [-integer_bound, integer_bound] so that exact
            oracles can enumerate them (Default: 3)
    max_integer
            Upper limit on the number of integer variables of a mixed-integer instance; extra ones
            drawn by integer_prob become continuous. None means no limit (Default: None)
    seed
            Seed of the generator (Default: 0)
    """
    if __doc__:
        __doc__ += OPTIONS_DOC

    _defaults: Dict[str, Any] = {
        'm': 10,
        'n': 50,
        'alpha': 0.95,
        'nnz_A': 100,
        'c_sigma': 0.1,
        'a_sigma': 1.0,
        'b_sigma': 1.0,
        'bound_sigma': 10.0,
        'eq_prob': 0.3,
        'integer_prob': 0.5,
        'integer_bound': 3,
        'max_integer': None,
        'seed': 0,
    }

    def _validate(self) -> None:
        for name in ('alpha', 'eq_prob', 'integer_prob'):
            if not 0 <= self.options[name] <= 1:
                raise ConfigurationError("%s must be in [0, 1], got %r" % (name, self.options[name]))
        if self.m < 0 or self.n < 1:
            raise ConfigurationError("Need m >= 0 and n >= 1, got m=%r n=%r" % (self.m, self.n))
        if not 0 <= self.nnz_A <= self.m * self.n:
            raise ConfigurationError("nnz_A must be in [0, m*n] = [0, %d], got %r" % (self.m * self.n, self.nnz_A))
        if self.max_integer is not None and self.max_integer < 0:
            raise ConfigurationError("max_integer must be None or non-negative, got %r" % self.max_integer)


class ExperimentSpec(Options):
    """A fitting or generalization experiment
    """

    OPTIONS_DOC = r"""
    task
            "fit-obj" fits optimal values with the graph head, "fit-sol" fits minimum-norm solutions
            with the node head, "fit-feas" fits the 0/1 feasibility indicator with the graph head
            (Default: "fit-obj")
    problem
            "lcqp" or "milcqp"; selects the network variant (Default: "lcqp")
    dataset
            Directory of a dataset written by ``write_dataset`` (Default: None)
    validation
            Directory of a held-out dataset, required by ``run_generalization`` (Default: None)
    widths
            Embedding sizes to train; ``run_generalization`` uses the last one (Default: (16, 32, 64))
    num_layers
            Message-passing layers (Default: 4)
    epochs, lr, patience, batch_size
            Passed on to the training schedule (Defaults: 2000, 5e-4, 50, 2500)
    seeds
            Initialization seeds; every configuration is trained once per seed (Default: (0, 1, 2))
    sizes
            Training-set sizes of ``run_generalization``, each a prefix of the dataset (Default: (100, 500, 2000))
    out_dir
            Directory receiving the CSV files (Default: "results")
    """
    if __doc__:
        __doc__ += OPTIONS_DOC

    _defaults: Dict[str, Any] = {
        'task': 'fit-obj',
        'problem': 'lcqp',
        'dataset': None,
        'validation': None,
        'widths': (16, 32, 64),
        'num_layers': 4,
        'epochs': 2000,
        'lr': 5e-4,
        'patience': 50,
        'batch_size': 2500,
        'seeds': (0, 1, 2),
        'sizes': (100, 500, 2000),
        'out_dir': 'results',
    }

    def _validate(self) -> None:
        assert_config(self.task, ('fit-obj', 'fit-sol', 'fit-feas'))
        assert_config(self.problem, ('lcqp', 'milcqp'))
        for name in ('widths', 'seeds', 'sizes'):
            self.options[name] = tuple(int(v) for v in self.options[name])
            if not self.options[name]:
                raise ConfigurationError("%s must not be empty" % name)
        if min(self.widths) < 1 or min(self.sizes) < 1:
            raise ConfigurationError("widths and sizes must be positive")

    @property
    def head(self) -> str:
        return 'node' if self.task == 'fit-sol' else 'graph'

    def gnn_config(self, width: int) -> GNNConfig:
        return GNNConfig(num_layers=self.num_layers, width=width, variant=self.problem, head=self.head)

    def schedule(self, seed: int) -> Schedule:
        return Schedule(lr=self.lr, epochs=self.epochs, patience=self.patience, batch_size=self.batch_size, seed=seed)
