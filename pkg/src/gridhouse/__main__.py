"""Allow ``python -m gridhouse ...`` as an alternative to the console script."""

import sys

from gridhouse.cli import main

sys.exit(main())
