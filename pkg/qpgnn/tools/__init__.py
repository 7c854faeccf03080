import os
import sys
from argparse import ArgumentParser
from logging import DEBUG, INFO, WARN, ERROR

import pandas as pd

from qpgnn import logger
from qpgnn.harness import format_table, write_table

common_argparser = ArgumentParser(add_help=False, epilog='Look at the qpgnn documentation for more info on the options')

common_argparser.add_argument('-v', '--verbose', action='count', default=0, help="Increase Logger output level, up to three times")
common_argparser.add_argument('--seed', type=int, default=0, help='seed of every random choice (default=0)')
common_argparser.add_argument('--out-dir', default=None, help='directory receiving datasets and result tables')
common_argparser.add_argument('--format', default='csv', choices=('csv', 'json'), help='format of result tables (default=csv)')


def configure_logging(namespace) -> None:
    logger.setLevel((ERROR, WARN, INFO, DEBUG)[min(namespace.verbose, 3)])


def emit(frame: pd.DataFrame, namespace, name: str, out=None) -> None:
    "Prints a result table, and stores it under --out-dir when one is given"
    (out or sys.stdout).write(format_table(frame, namespace.format))
    if namespace.out_dir:
        write_table(frame, os.path.join(namespace.out_dir, '%s.%s' % (name, namespace.format)), namespace.format)
