import sys

from fpdiff.main import main

sys.exit(main())
