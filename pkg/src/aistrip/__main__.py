from aistrip.cli import main

raise SystemExit(main())
