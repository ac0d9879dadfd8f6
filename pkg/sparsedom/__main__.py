from sparsedom.cli import main

main()
