# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import sys

# Local folder libraries
from .cli_runner.main import main

if __name__ == "__main__":
    sys.exit(main())
