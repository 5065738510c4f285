import sys

from hhx.cli.main import main

sys.exit(main())
