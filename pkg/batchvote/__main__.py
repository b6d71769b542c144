import sys

from batchvote.cli import main

sys.exit(main())
