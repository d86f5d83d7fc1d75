from robinlab.cli import main

raise SystemExit(main())
