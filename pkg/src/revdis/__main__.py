import sys

from revdis.cli import main

sys.exit(main())
