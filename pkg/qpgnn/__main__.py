import sys

from qpgnn.tools.cli import main

sys.exit(main())
