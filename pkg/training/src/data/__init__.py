"""Image buffers, file I/O and datasets"""
