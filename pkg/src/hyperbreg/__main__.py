"""Main entry point for hyperbreg."""

import sys
import asyncio
from .cli import EXIT_INTERRUPTED, EXIT_SOLVER, EXIT_VALIDATION, HyperbregCLI
from .utils.exceptions import ValidationError


def main() -> int:
    """Main entry point for the hyperbreg application."""
    try:
        cli = HyperbregCLI()
        args = cli.parse_arguments(sys.argv[1:])
        return asyncio.run(cli.execute_command(args))
    except ValidationError as e:
        print(f"Validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_INTERRUPTED
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
