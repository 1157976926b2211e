"""Prior learning, SNIS estimation and denoising pipeline"""
