# This file makes the channels folder a "Python package"
