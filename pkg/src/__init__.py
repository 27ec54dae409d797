# relaycap: outage capacity of large relay networks under random attacks
__version__ = "1.0.0"
