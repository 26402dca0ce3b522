from saddlekit.cli import main

raise SystemExit(main())
