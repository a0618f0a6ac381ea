import sys

from pytransmission.cli import main

sys.exit(main())
