import sys

from fairbandits.cli import main

sys.exit(main())
