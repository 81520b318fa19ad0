# Shared logging and input validation helpers
