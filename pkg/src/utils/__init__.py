# Configuration, logging, errors and random streams
