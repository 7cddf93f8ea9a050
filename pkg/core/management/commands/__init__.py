# Command package for project-specific management commands.
