import sys

from predmap.cli import main

sys.exit(main())
