#!/usr/bin/python3

# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#


"""This module parse mvfuse_options.py and mvfuse_cli.py to generate different files:
    Usage:  python gendoc.py options    Generate the markdown tables of the options (docs/options.md)
            python gendoc.py cli        Generate the markdown help of every mvfuse command (docs/cli.md)
"""

import sys
from pathlib import Path

WORKSPACE_DIR = str(Path(__file__).parent.parent)

sys.path += ( WORKSPACE_DIR, )
# pylint: disable=wrong-import-position
from mvfuse.module_utils.mvfuse_util import init_log
from mvfuse.module_utils.mvfuse_options import options_markdown
from mvfuse.modules.mvfuse_cli import EXAMPLES, build_parser


def cli_markdown():
    """Help of the parser and of every sub command."""
    parser = build_parser()
    lines = ["# mvfuse command line", "", "```", parser.format_help().rstrip(), "```", ""]
    # pylint: disable=protected-access
    subparsers = next(action for action in parser._actions if action.dest == 'command')
    for name, sub in subparsers.choices.items():
        lines += [f"## mvfuse {name}", "", "```", sub.format_help().rstrip(), "```", ""]
    lines += ["## Examples", "", "```", EXAMPLES.strip(), "```", ""]
    return "\n".join(lines)


if __name__ == "__main__":
    init_log("gendoc")
    actions = { 'options': options_markdown, 'cli': cli_markdown }
    if len(sys.argv) != 2 or sys.argv[1] not in actions:
        print(__doc__, file=sys.stderr)
        sys.exit(1)
    print(actions[sys.argv[1]]())
