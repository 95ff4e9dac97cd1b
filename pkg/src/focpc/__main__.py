import sys

from focpc.cli import main

sys.exit(main())
