import sys

from obcs.cli import main

sys.exit(main())
