import sys

from dotenv import load_dotenv

from sepscope import observability
from sepscope.cli import main

# --- Configuration and Setup ---

# Load environment variables from .env file
load_dotenv()

# Logging (and span export when ENABLE_TRACING=true)
observability.configure()

if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nStopped by user.", file=sys.stderr)
        sys.exit(130)
