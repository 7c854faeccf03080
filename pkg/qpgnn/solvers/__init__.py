from .common import Status, SolveResult, row_bounds, stacked_constraints
from .simplex import LPResult, lp_phase1, solve_lp
from .admm import ADMMResult, admm_qp
from .lcqp import kkt_residual, solve_lcqp
from .branch_and_bound import brute_force_milcqp, is_mi_feasible, solve_milcqp
from .targets import TargetLabels, evaluate_targets, read_label, write_label, label_path
