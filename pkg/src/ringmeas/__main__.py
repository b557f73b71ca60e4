import sys

from ringmeas.cli import main

sys.exit(main())
