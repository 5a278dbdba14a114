class Error(Exception):
    pass


class ArgumentsError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ParseError(ArgumentsError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TrainingError(Error):
    def __init__(self, message, tensor=None):
        super().__init__(message)
        self.message = message
        self.tensor = tensor


class GenerationError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message
