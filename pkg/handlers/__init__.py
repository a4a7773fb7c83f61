# This file makes the handlers folder a "Python package"
# handlers.commands maps each polar.py subcommand to its handler
