import sys

from tscd_bench.main import main


sys.exit(main())
