from minicat.cli import main

raise SystemExit(main())
