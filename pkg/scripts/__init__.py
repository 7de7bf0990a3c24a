# Scripts package for strip factorisation verification tools
