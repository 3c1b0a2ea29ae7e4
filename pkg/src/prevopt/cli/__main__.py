import sys

from prevopt.cli.main import main

sys.exit(main())
