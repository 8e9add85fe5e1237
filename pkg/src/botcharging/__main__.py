import sys

from botcharging.cli import main

sys.exit(main())
