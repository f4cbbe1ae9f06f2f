from panelmsm.version import __version__

assert __version__
