# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import shutil
import sys
from pathlib import Path

# Do PYTHONPATH insert() instead of append() to prefer any local repo checkout over any pip install
REPO_ROOT = Path(__file__).parent.parent.resolve()
sys.path.insert(0, str(REPO_ROOT))

# Import before others since it modifies PYTHONPATH. pylint: disable=unused-import
import tools.tools_pythonpath  # noqa: F401

# Third party libraries
from tsfpga.system_utils import create_file, read_file
from tsfpga.tools.sphinx_doc import build_sphinx, generate_release_notes

# First party libraries
from elliptic_sectors.about import get_readme_rst, get_short_slogan
from elliptic_sectors.cli_runner.config import load_config
from tools import tools_env

GENERATED_SPHINX = tools_env.ELLIPTIC_SECTORS_GENERATED / "sphinx_rst"
GENERATED_SPHINX_HTML = tools_env.ELLIPTIC_SECTORS_GENERATED / "sphinx_html"
SPHINX_DOC = tools_env.ELLIPTIC_SECTORS_DOC / "sphinx"


def main() -> None:
    rst = generate_release_notes(
        repo_root=tools_env.REPO_ROOT,
        release_notes_directory=tools_env.ELLIPTIC_SECTORS_DOC / "release_notes",
        project_name="elliptic-sectors",
    )
    create_file(GENERATED_SPHINX / "generated_release_notes.rst", rst)

    generate_bibtex()

    generate_documentation()

    # Copy files from documentation folder to build folder
    for path in SPHINX_DOC.glob("*"):
        if path.is_file():
            shutil.copyfile(path, GENERATED_SPHINX / path.name)
        else:
            shutil.copytree(path, GENERATED_SPHINX / path.name, dirs_exist_ok=True)

    build_sphinx(build_path=GENERATED_SPHINX, output_path=GENERATED_SPHINX_HTML)


def generate_bibtex() -> None:
    """
    Generate a BibTeX snippet for citing this project.

    Since BibTeX also uses curly braces, f-string formatting is hard here.
    Hence the string is split up.
    """
    rst_before = """\
.. code-block:: tex

  @misc{elliptic-sectors,
    author = {{The elliptic-sectors authors}},
    title  = {{elliptic-sectors: """

    rst_after = """}},
    url    = {https://github.com/elliptic-sectors/elliptic-sectors},
  }
"""

    rst = f"{rst_before}{get_short_slogan()}{rst_after}"

    create_file(GENERATED_SPHINX / "bibtex.rst", rst)


def generate_documentation() -> None:
    index_rst = f"""
{get_readme()}

.. toctree::
  :caption: About
  :hidden:

  license_information
  contributing
  release_notes


.. toctree::
  :caption: User guide
  :hidden:

  getting_started
  scenarios
"""
    create_file(GENERATED_SPHINX / "index.rst", index_rst)
    create_file(GENERATED_SPHINX / "scenarios.rst", get_scenarios_rst())


def get_scenarios_rst() -> str:
    """
    One section per shipped scenario file, with the tasks it runs and its full text.
    Every file is parsed, so a broken scenario fails the documentation build.
    """
    rst = """\
Shipped scenarios
=================

These scenario files are part of the repository and run by ``tools/run_scenarios.py``.
"""

    for scenario_file in sorted(tools_env.ELLIPTIC_SECTORS_SCENARIOS.glob("*.cfg")):
        scenario = load_config(scenario_file)
        heading = scenario_file.name
        tasks = ", ".join(f"``{task}``" for task in scenario.tasks)
        text = "\n".join(f"  {line}".rstrip() for line in read_file(scenario_file).splitlines())

        rst += f"""
{heading}
{"-" * len(heading)}

Domain ``{scenario.domain}``, tasks {tasks}.

.. code-block:: text

{text}
"""

    return rst


def get_readme() -> str:
    """
    Get the complete README.rst to be used on website.

    Will also verify that readme.rst in the project root is identical.
    RST file inclusion in README.rst does not work on github unfortunately, hence this
    cumbersome handling where the README is duplicated in two places.
    """
    # First, verify readme.rst in repo root
    readme_rst = get_readme_rst()
    if read_file(tools_env.REPO_ROOT / "readme.rst") != readme_rst:
        file_path = create_file(GENERATED_SPHINX / "readme.rst", readme_rst)
        assert (
            False
        ), f"readme.rst in repo root not correct. Compare to reference in python: {file_path}"

    return get_readme_rst(include_extra_for_website=True)


if __name__ == "__main__":
    main()
