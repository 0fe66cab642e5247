import sys

from mtkernel.main import main

sys.exit(main())
