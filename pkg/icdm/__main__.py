from icdm.main import main

main()
