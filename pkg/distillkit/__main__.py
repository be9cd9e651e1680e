"""Entry point for `python -m distillkit`"""

import sys

from .cli.main import main

sys.exit(main())
