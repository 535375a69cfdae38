__cli_version__ = "0001"
