# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
from pathlib import Path

REPO_ROOT = Path(__file__).parent.parent.resolve()
ELLIPTIC_SECTORS_SCENARIOS = REPO_ROOT / "scenarios"

ELLIPTIC_SECTORS_DOC = REPO_ROOT / "doc"
ELLIPTIC_SECTORS_GENERATED = REPO_ROOT / "generated"
