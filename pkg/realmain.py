# realmain.py

import sys

# 명령행 진입점 (simulate / estimate / compare / maneuver)
from gliderSimulate.main import main

if __name__ == "__main__":
    sys.exit(main())
