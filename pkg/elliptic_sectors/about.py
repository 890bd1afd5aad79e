# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------


def get_short_slogan() -> str:
    """
    Short slogan used in e.g. Python documentation.

    Note that this slogan should be the same as the one used in the readme.
    The difference is capitalization and whether the project name is included.
    """
    result = (
        "A desk-scale verification lab for sectorial elliptic forms under mixed boundary conditions"
    )
    return result


def get_readme_rst(include_extra_for_website: bool = False) -> str:
    """
    Get the complete README.rst.
    The readme in the repo root must be identical to what this function returns with default
    arguments, which is checked by the unit tests.

    Arguments:
        include_extra_for_website (bool): Include the initial heading that the website landing
            page needs in order to get the correct title.
    """
    if include_extra_for_website:
        readme_rst = """\
About elliptic-sectors
======================

"""
    else:
        readme_rst = ""

    readme_rst += """\
The elliptic-sectors project is a desk-scale verification lab for sectorial elliptic forms
under mixed boundary conditions.
It discretizes the form of a second order elliptic operator with a real, nonsymmetric coefficient
function on planar domains, with Dirichlet conditions on a closed boundary part and Neumann,
Robin or dynamic conditions on the rest, and checks numerically every claim about it that can be
checked with a finite element model.

The following things can be found, at a glance, in the different modules:

* Sector angles of coefficient matrices, the L^p sector angle formula and the pointwise pairing
  integrand in ``sector_math``.

* Ahlfors-regular curves, dyadic cell trees, regular mantles and collars in
  ``regular_geometry``.

* Mesh presets (square, L-shape, slit disc, cusp) and P1 assembly with Robin and dynamic boundary
  mass in ``mesh_fem``.

* Pairings, numerical ranges, resolvent norms and spectra of the discrete operators in
  ``operator_lab``.

* Matrix exponentials, contraction, positivity and ultracontractivity checks in
  ``semigroup_lab``.

* Hardy quotients, averaged boundary limits and form-domain membership experiments in
  ``trace_hardy``.

* Scenario configuration, the ``elliptic-sectors`` command line tool and its reports in
  ``cli_runner``.

Everything is driven by plain-text scenario files, see the ``scenarios`` folder, and every run is
reproducible bit for bit from its seed.
"""

    return readme_rst
