import sys

from .sweepcli.cli import main

sys.exit(main())
