import sys

from fopa_noise.cli import main

sys.exit(main())
