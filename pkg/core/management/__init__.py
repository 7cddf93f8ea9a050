# Management package for custom Django commands.
