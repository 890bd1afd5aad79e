# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
from pathlib import Path

# Local folder libraries
from .about import get_short_slogan

REPO_ROOT = Path(__file__).parent.parent.resolve()
SCENARIOS_DIRECTORY = REPO_ROOT / "scenarios"

__version__ = "1.0.0-dev"
__doc__ = get_short_slogan()  # pylint: disable=redefined-builtin

# Square matrices up to this size are handled with dense factorizations and exponentials.
DENSE_BUDGET = 4000
