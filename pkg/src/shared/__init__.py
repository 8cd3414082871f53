"""Settings, logging and exceptions shared across isingvote."""
