import sys

from chunkpart.cli import main

sys.exit(main())
