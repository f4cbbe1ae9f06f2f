import sys

from panelmsm.cli.main import main

sys.exit(main())
