import sys

from dynalab.harness.cli import main

sys.exit(main())
