import unittest
import logging

from qpgnn import logger

from .test_logger import Testlogger
from .test_instance import TestInstance
from .test_load_instance import TestLoadInstance, TestInstanceFiles
from .test_graph import TestGraph
from .test_refinement import TestRefinement
from .test_tractability import TestTractability
from .test_solvers import TestSimplex, TestADMM, TestLCQP, TestMixedInteger, TestTargets
from .test_gnn import TestGNN, TestCheckpoint
from .test_training import TestTraining
from .test_generator import TestGenerator, TestDataset
from .test_corpus import TestCorpus
from .test_properties import TestProperties
from .test_harness import TestTables, TestExperiments
from .test_tools import TestCli
from .test_acceptance import TestAcceptance

logger.setLevel(logging.INFO)

if __name__ == '__main__':
    unittest.main()
