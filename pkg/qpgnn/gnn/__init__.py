from .model import (Batch, FeatureEncoding, GNNParams, backward, count_parameters, forward_graph,
                    forward_node, init_params, load_checkpoint, loss_msre, predict, relative_errors,
                    save_checkpoint)
from .training import Adam, TrainingHistory, mean_relative_error, train
