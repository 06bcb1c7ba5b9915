"""python -m mvfuse"""

import sys

from mvfuse.modules.mvfuse_cli import main

sys.exit(main())
