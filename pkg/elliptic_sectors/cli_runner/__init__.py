# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

"""
Scenario files, task orchestration and report output.
"""
