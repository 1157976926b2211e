# Tests package for the class-adapted denoiser
